// Model files.
//
// Layout, all integers little-endian:
//   "MH4MODEL"                      8-byte magic
//   u32 version                     kModelFormatVersion
//   u32 count, {str key, str value}   metadata
//   word table, suffix table        u32 count, {str, i32 frequency}
//   u32 count, {str}                labels
//   9 x i32                         ModelDims
//   u32 count, {str name, u32 rows, u32 cols, f32[rows*cols]}  column-major
// where str is u32 length followed by bytes.

#ifndef MH4_MODEL_IO_HPP_
#define MH4_MODEL_IO_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mh4/model.hpp"
#include "mh4/vocab.hpp"

namespace mh4 {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ParserModel {
  Vocabulary vocab;
  Model<float> params;
  std::map<std::string, std::string> meta;

  bool operator==(const ParserModel& o) const {
    return vocab == o.vocab && params == o.params && meta == o.meta;
  }
};

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagic : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class VersionMismatch : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class TruncatedModel : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class ShapeMismatch : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

std::string serialize_model(const ParserModel& model);
ParserModel deserialize_model(std::string_view bytes);

void save_model(const ParserModel& model, const std::string& path);
/// Throws std::runtime_error when the file cannot be read, ModelFormatError
/// subclasses for bad contents.
ParserModel load_model(const std::string& path);

}  // namespace mh4

#endif  // MH4_MODEL_IO_HPP_
