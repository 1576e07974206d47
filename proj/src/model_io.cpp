#include "mh4/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mh4 {

namespace {

constexpr char kMagic[8] = {'M', 'H', '4', 'M', 'O', 'D', 'E', 'L'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw TruncatedModel(std::string("model file truncated while reading ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(const char* what) {
    const std::uint32_t len = u32(what);
    need(len, what);
    std::string s(in_.substr(pos_, len));
    pos_ += len;
    return s;
  }
  std::string_view raw(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_table(Writer& w, const SymbolTable& t) {
  w.u32(static_cast<std::uint32_t>(t.size() - SymbolTable::kReserved));
  for (int i = SymbolTable::kReserved; i < t.size(); ++i) {
    w.str(t.name(i));
    w.i32(t.count(i));
  }
}

SymbolTable read_table(Reader& r) {
  const std::uint32_t n = r.u32("symbol table size");
  std::vector<std::string> names;
  std::vector<int> counts;
  for (std::uint32_t i = 0; i < n; ++i) {
    names.push_back(r.str("symbol"));
    counts.push_back(r.i32("symbol count"));
  }
  return SymbolTable::from_entries(std::move(names), std::move(counts));
}

}  // namespace

std::string serialize_model(const ParserModel& model) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.meta.size()));
  for (const auto& [k, v] : model.meta) {
    w.str(k);
    w.str(v);
  }
  write_table(w, model.vocab.words());
  write_table(w, model.vocab.suffixes());
  const auto& labels = model.vocab.labels();
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (const auto& l : labels.names()) w.str(l);

  const auto& d = model.params.dims();
  for (int v : {d.window, d.word_dim, d.suffix_dim, d.hidden, d.context, d.biaffine, d.words,
                d.suffixes, d.labels}) {
    w.i32(v);
  }
  std::uint32_t blocks = 0;
  model.params.visit([&](const std::string&, const Mat<float>&, Group) { ++blocks; });
  w.u32(blocks);
  model.params.visit([&](const std::string& name, const Mat<float>& m, Group) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) w.f32(m.data()[i]);
  });
  return w.take();
}

ParserModel deserialize_model(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw BadMagic("not a model file (bad magic)");
  }
  r.raw(sizeof kMagic, "magic");
  const std::uint32_t version = r.u32("version");
  if (version != kModelFormatVersion) {
    throw VersionMismatch("model format version " + std::to_string(version) + ", expected " +
                          std::to_string(kModelFormatVersion));
  }
  ParserModel out;
  const std::uint32_t meta = r.u32("metadata count");
  for (std::uint32_t i = 0; i < meta; ++i) {
    std::string k = r.str("metadata key");
    out.meta[k] = r.str("metadata value");
  }
  SymbolTable words = read_table(r);
  SymbolTable suffixes = read_table(r);
  LabelTable labels;
  const std::uint32_t nlabels = r.u32("label count");
  for (std::uint32_t i = 0; i < nlabels; ++i) labels.intern(r.str("label"));
  out.vocab.set_tables(std::move(words), std::move(suffixes), std::move(labels));

  ModelDims d;
  for (int* p : {&d.window, &d.word_dim, &d.suffix_dim, &d.hidden, &d.context, &d.biaffine,
                 &d.words, &d.suffixes, &d.labels}) {
    *p = r.i32("dimensions");
  }
  if (d.words != out.vocab.words().size() || d.suffixes != out.vocab.suffixes().size() ||
      d.labels != std::max(1, out.vocab.labels().size())) {
    throw ShapeMismatch("model dimensions disagree with the stored vocabulary");
  }
  try {
    out.params.resize(d);
  } catch (const std::invalid_argument& e) {
    throw ShapeMismatch(e.what());
  }

  std::uint32_t expected = 0;
  out.params.visit([&](const std::string&, Mat<float>&, Group) { ++expected; });
  const std::uint32_t blocks = r.u32("block count");
  if (blocks != expected) throw ShapeMismatch("unexpected number of parameter blocks");
  out.params.visit([&](const std::string& name, Mat<float>& m, Group) {
    const std::string stored = r.str("block name");
    const std::uint32_t rows = r.u32("block shape");
    const std::uint32_t cols = r.u32("block shape");
    if (stored != name || rows != m.rows() || cols != m.cols()) {
      throw ShapeMismatch("block " + stored + " " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " does not match " + name + " " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    r.need(static_cast<std::size_t>(rows) * cols * 4, "block payload");
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f32("block payload");
  });
  if (!r.done()) throw ModelFormatError("trailing bytes after model payload");
  return out;
}

void save_model(const ParserModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("error writing model file " + path);
}

ParserModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace mh4
