#include "crisislens/multitask/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "crisislens/error.hpp"

namespace crisislens::multitask {

using diff::Tensor;

namespace {

constexpr const char* kGatesTensor = "bprm.gates";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_tensor(std::string& out, const std::string& name, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put_u32(out, static_cast<std::uint32_t>(t.shape().size()));
  for (std::size_t d : t.shape()) put_u64(out, d);
  for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64() { return uint(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::Format, "model file truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const TrainedModel& m) {
  nlohmann::ordered_json meta;
  meta["config"] = to_json(m.config);
  meta["vocab"] = m.vocab.tokens();
  meta["lexicon"] = m.lexicon.to_json();
  meta["bprm_incumbent"] = m.bprm_incumbent ? nlohmann::ordered_json(*m.bprm_incumbent) : nlohmann::ordered_json();
  const std::string meta_text = meta.dump();

  std::string out(kModelMagic, 4);
  put_u64(out, meta_text.size());
  out += meta_text;
  put_u64(out, m.params.names().size() + 1);
  for (const auto& [name, p] : m.params) put_tensor(out, name, p.value);
  put_tensor(out, kGatesTensor, Tensor::vector(m.gates));
  return out;
}

TrainedModel deserialize_model(const std::string& bytes) {
  Reader r(bytes);
  if (r.raw(4) != std::string(kModelMagic, 4)) fail(ErrorKind::Format, "not a model file (bad magic or version)");
  const std::uint64_t meta_len = r.u64();
  if (meta_len > r.remaining()) fail(ErrorKind::Format, "model file truncated in metadata");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(r.raw(meta_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("corrupt model metadata: ") + e.what());
  }
  TrainedModel m;
  try {
    m.config = model_config_from_json(meta.at("config"));
    m.vocab = embedkb::Vocabulary(meta.at("vocab").get<std::vector<std::string>>());
    m.lexicon = embedkb::KnowledgeLexicon::from_json(meta.at("lexicon"));
    if (!meta.at("bprm_incumbent").is_null()) m.bprm_incumbent = meta["bprm_incumbent"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("corrupt model metadata: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::Format, "corrupt model metadata: " + e.detail());
  }

  const std::uint64_t n = r.u64();
  bool have_gates = false;
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::string name = r.raw(r.u32());
    const std::uint32_t rank = r.u32();
    if (rank > 8) fail(ErrorKind::Format, "tensor '" + name + "' has implausible rank");
    diff::Shape shape;
    std::uint64_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(r.u64());
      total *= shape.back();
    }
    if (total > r.remaining() / 8) fail(ErrorKind::Format, "model file truncated in tensor '" + name + "'");
    std::vector<double> values(total);
    for (auto& v : values) v = std::bit_cast<double>(r.u64());
    Tensor t(shape, std::move(values));
    if (name == kGatesTensor) {
      m.gates.assign(t.values().begin(), t.values().end());
      have_gates = true;
    } else {
      if (m.params.contains(name)) fail(ErrorKind::Format, "duplicate tensor '" + name + "'");
      m.params.add(name, std::move(t));
    }
  }
  if (!have_gates) fail(ErrorKind::Format, "model file has no gates");
  if (!r.done()) fail(ErrorKind::Format, "trailing bytes after model data");
  return m;
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write model " + path.string());
  const std::string bytes = serialize_model(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Input, "cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace crisislens::multitask
