#include "seqjsp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace seqjsp {

namespace {

constexpr std::string_view kMagic = "SEQJSPCK";
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename U>
  void put(U value) {
    static_assert(std::is_arithmetic_v<U>);
    using Bits = std::conditional_t<sizeof(U) == 1, std::uint8_t,
                 std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>>;
    const auto bits = std::bit_cast<Bits>(value);
    for (std::size_t k = 0; k < sizeof(U); ++k) out_.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
  }
  template <typename U>
  void put_vector(const std::vector<U>& v) {
    put<std::uint64_t>(v.size());
    for (auto x : v) put(x);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename U>
  U get() {
    using Bits = std::conditional_t<sizeof(U) == 1, std::uint8_t,
                 std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>>;
    need(sizeof(U));
    Bits bits = 0;
    for (std::size_t k = 0; k < sizeof(U); ++k)
      bits |= static_cast<Bits>(static_cast<Bits>(static_cast<unsigned char>(in_[pos_ + k])) << (8 * k));
    pos_ += sizeof(U);
    return std::bit_cast<U>(bits);
  }
  template <typename U>
  std::vector<U> get_vector() {
    const auto n = get<std::uint64_t>();
    if (n > (in_.size() - pos_) / sizeof(U)) throw ValidationError("checkpoint: truncated array");
    std::vector<U> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = get<U>();
    return v;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ValidationError("checkpoint: unexpected end of data");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

template <typename T>
LoadedCheckpoint read_body(Reader& r, const ModelConfig& cfg, std::optional<TrainedShape> shape) {
  PolicyModel<T> model(cfg, 0);
  const auto params = r.get_vector<T>();
  if (params.size() != model.parameter_count())
    throw ValidationError("checkpoint: parameter count " + std::to_string(params.size()) + " does not match config (" +
                          std::to_string(model.parameter_count()) + ")");
  model.set_flat_parameters(params);
  model.set_flat_norm_stats(r.get_vector<T>());
  std::optional<TrainingState> training;
  if (r.get<std::uint8_t>()) {
    TrainingState s;
    s.epochs_done = r.get<std::int32_t>();
    s.adam_step = r.get<std::uint64_t>();
    s.eval_generation = r.get<std::uint64_t>();
    s.config_hash = r.get<std::uint64_t>();
    s.adam_m = r.get_vector<double>();
    s.adam_v = r.get_vector<double>();
    s.baseline_params = r.get_vector<double>();
    s.baseline_stats = r.get_vector<double>();
    training = std::move(s);
  }
  if (!r.done()) throw ValidationError("checkpoint: trailing bytes");
  return {std::move(model), std::move(training), shape};
}

}  // namespace

const ModelConfig& LoadedCheckpoint::config() const {
  return std::visit([](const auto& m) -> const ModelConfig& { return m.config(); }, model);
}

template <typename T>
std::string serialize_checkpoint(const PolicyModel<T>& model, const TrainingState* training,
                                 std::optional<TrainedShape> shape) {
  Writer w;
  w.raw(kMagic);
  w.put(kVersion);
  w.put<std::uint8_t>(sizeof(T));
  const auto& cfg = model.config();
  w.put<std::int32_t>(cfg.d_h);
  w.put<std::int32_t>(cfg.n_heads);
  w.put<std::int32_t>(cfg.n_layers);
  w.put<std::int32_t>(cfg.ff_width);
  w.put<std::uint8_t>(cfg.score_clip.has_value());
  w.put<double>(cfg.score_clip.value_or(0.0));
  w.put<std::uint8_t>(shape.has_value());
  w.put<std::int32_t>(shape ? shape->n_jobs : 0);
  w.put<std::int32_t>(shape ? shape->n_machines : 0);
  w.put_vector(model.flat_parameters());
  w.put_vector(model.flat_norm_stats());
  w.put<std::uint8_t>(training != nullptr);
  if (training) {
    w.put<std::int32_t>(training->epochs_done);
    w.put(training->adam_step);
    w.put(training->eval_generation);
    w.put(training->config_hash);
    w.put_vector(training->adam_m);
    w.put_vector(training->adam_v);
    w.put_vector(training->baseline_params);
    w.put_vector(training->baseline_stats);
  }
  return w.take();
}

LoadedCheckpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) throw ValidationError("not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  const auto width = r.get<std::uint8_t>();
  ModelConfig cfg;
  cfg.d_h = r.get<std::int32_t>();
  cfg.n_heads = r.get<std::int32_t>();
  cfg.n_layers = r.get<std::int32_t>();
  cfg.ff_width = r.get<std::int32_t>();
  const bool has_clip = r.get<std::uint8_t>() != 0;
  const double clip = r.get<double>();
  if (has_clip) cfg.score_clip = clip;
  std::optional<TrainedShape> shape;
  const bool has_shape = r.get<std::uint8_t>() != 0;
  TrainedShape tag{r.get<std::int32_t>(), 0};
  tag.n_machines = r.get<std::int32_t>();
  if (has_shape) {
    if (tag.n_jobs < 1 || tag.n_machines < 1) throw ValidationError("checkpoint: bad trained shape");
    shape = tag;
  }
  if (width == 4) {
    cfg.precision = Precision::F32;
    cfg.validate();
    return read_body<float>(r, cfg, shape);
  }
  if (width == 8) {
    cfg.precision = Precision::F64;
    cfg.validate();
    return read_body<double>(r, cfg, shape);
  }
  throw ValidationError("checkpoint: bad precision byte " + std::to_string(width));
}

template <typename T>
void save_checkpoint(const std::string& path, const PolicyModel<T>& model, const TrainingState* training,
                     std::optional<TrainedShape> shape) {
  write_text_file(path, serialize_checkpoint(model, training, shape));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) s[static_cast<std::size_t>(k)] = digits[h & 0xf];
  return s;
}

template std::string serialize_checkpoint(const PolicyModel<float>&, const TrainingState*, std::optional<TrainedShape>);
template std::string serialize_checkpoint(const PolicyModel<double>&, const TrainingState*,
                                          std::optional<TrainedShape>);
template void save_checkpoint(const std::string&, const PolicyModel<float>&, const TrainingState*,
                              std::optional<TrainedShape>);
template void save_checkpoint(const std::string&, const PolicyModel<double>&, const TrainingState*,
                              std::optional<TrainedShape>);

}  // namespace seqjsp
