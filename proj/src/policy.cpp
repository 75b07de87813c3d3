#include "seqjsp/policy.hpp"

#include <cmath>
#include <numeric>

namespace seqjsp {

Precision parse_precision(std::string_view s) {
  if (s == "f32" || s == "32") return Precision::F32;
  if (s == "f64" || s == "64") return Precision::F64;
  throw ValidationError("unknown precision '" + std::string(s) + "' (expected f32 or f64)");
}

std::string_view to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

void ModelConfig::validate() const {
  std::vector<std::string> errors;
  if (d_h < 1) errors.push_back("d_h must be positive");
  if (n_heads < 1) errors.push_back("n_heads must be positive");
  if (d_h >= 1 && n_heads >= 1 && d_h % n_heads != 0) errors.push_back("d_h must be divisible by n_heads");
  if (n_layers < 1) errors.push_back("n_layers must be >= 1");
  if (ff_width < 1) errors.push_back("ff_width must be positive");
  if (score_clip && !(*score_clip > 0)) errors.push_back("score_clip must be positive when set");
  if (errors.empty()) return;
  std::string msg = "invalid model config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ValidationError(msg);
}

// ---------------------------------------------------------------------------
// PolicyModel

template <typename T>
int PolicyModel<T>::add_param(std::string name, int rows, int cols) {
  params_.push_back(Matrix::Zero(rows, cols));
  names_.push_back(std::move(name));
  return static_cast<int>(params_.size()) - 1;
}

template <typename T>
typename PolicyModel<T>::NormSlot PolicyModel<T>::add_norm(const std::string& name, int width) {
  NormSlot slot{};
  slot.gamma = add_param(name + ".gamma", 1, width);
  slot.beta = add_param(name + ".beta", 1, width);
  slot.stats = static_cast<int>(stats_.size());
  stats_.push_back({ad::RowVector<T>::Zero(width), ad::RowVector<T>::Ones(width)});
  return slot;
}

template <typename T>
PolicyModel<T>::PolicyModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const int d = config_.d_h;
  auto& s = slots_;
  s.norm_ij = add_norm("embed.norm_ij", 2);
  s.w_ij = add_param("embed.w_ij", 2, d);
  s.b_ij = add_param("embed.b_ij", 1, d);
  s.norm_mp = add_norm("embed.norm_mp", 2);
  s.w_mp = add_param("embed.w_mp", 2, d);
  s.b_mp = add_param("embed.b_mp", 1, d);
  s.norm_sum = add_norm("embed.norm_sum", d);
  s.w_post = add_param("embed.w_post", d, d);
  s.b_post = add_param("embed.b_post", 1, d);
  for (int l = 0; l < config_.n_layers; ++l) {
    const auto pre = "encoder." + std::to_string(l) + ".";
    LayerSlots ls{};
    ls.wq = add_param(pre + "wq", d, d);
    ls.wk = add_param(pre + "wk", d, d);
    ls.wv = add_param(pre + "wv", d, d);
    ls.wo = add_param(pre + "wo", d, d);
    ls.norm1 = add_norm(pre + "norm1", d);
    ls.ff1_w = add_param(pre + "ff1_w", d, config_.ff_width);
    ls.ff1_b = add_param(pre + "ff1_b", 1, config_.ff_width);
    ls.ff2_w = add_param(pre + "ff2_w", config_.ff_width, d);
    ls.ff2_b = add_param(pre + "ff2_b", 1, d);
    ls.norm2 = add_norm(pre + "norm2", d);
    s.layers.push_back(ls);
  }
  s.w_init = add_param("decoder.w_init", d, d);
  s.b_init = add_param("decoder.b_init", 1, d);
  s.start = add_param("decoder.start", 1, d);
  const char* gate[3] = {"r", "z", "n"};
  for (int g = 0; g < 3; ++g) {
    s.gru_wx[g] = add_param(std::string("decoder.gru.wx_") + gate[g], d, d);
    s.gru_bx[g] = add_param(std::string("decoder.gru.bx_") + gate[g], 1, d);
    s.gru_wh[g] = add_param(std::string("decoder.gru.wh_") + gate[g], d, d);
    s.gru_bh[g] = add_param(std::string("decoder.gru.bh_") + gate[g], 1, d);
  }
  s.ptr_keys = add_param("pointer.w1", d, d);
  s.ptr_query = add_param("pointer.w2", d, d);
  s.ptr_v = add_param("pointer.v", d, 1);

  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto& name = names_[k];
    if (name.ends_with(".gamma")) {
      params_[k].setOnes();
    } else if (name.ends_with(".beta")) {
      params_[k].setZero();
    } else {
      for (Eigen::Index i = 0; i < params_[k].size(); ++i)
        params_[k].data()[i] = static_cast<T>((2.0 * rng.uniform01() - 1.0) * bound);
    }
  }
}

template <typename T>
std::size_t PolicyModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& m : params_) n += static_cast<std::size_t>(m.size());
  return n;
}

template <typename T>
std::vector<T> PolicyModel<T>::flat_parameters() const {
  std::vector<T> out;
  out.reserve(parameter_count());
  for (const auto& m : params_) out.insert(out.end(), m.data(), m.data() + m.size());
  return out;
}

template <typename T>
void PolicyModel<T>::set_flat_parameters(std::span<const T> flat) {
  if (flat.size() != parameter_count()) throw ValidationError("flat parameter vector has the wrong length");
  std::size_t off = 0;
  for (auto& m : params_) {
    std::copy_n(flat.data() + off, m.size(), m.data());
    off += static_cast<std::size_t>(m.size());
  }
}

template <typename T>
std::vector<T> PolicyModel<T>::flat_norm_stats() const {
  std::vector<T> out;
  for (const auto& s : stats_) {
    out.insert(out.end(), s.mean.data(), s.mean.data() + s.mean.size());
    out.insert(out.end(), s.var.data(), s.var.data() + s.var.size());
  }
  return out;
}

template <typename T>
void PolicyModel<T>::set_flat_norm_stats(std::span<const T> flat) {
  std::size_t need = 0;
  for (const auto& s : stats_) need += static_cast<std::size_t>(s.mean.size() + s.var.size());
  if (flat.size() != need) throw ValidationError("normalization statistics have the wrong length");
  std::size_t off = 0;
  for (auto& s : stats_) {
    std::copy_n(flat.data() + off, s.mean.size(), s.mean.data());
    off += static_cast<std::size_t>(s.mean.size());
    std::copy_n(flat.data() + off, s.var.size(), s.var.data());
    off += static_cast<std::size_t>(s.var.size());
  }
}

template <typename T>
void PolicyModel<T>::zero_pointer() {
  params_[static_cast<std::size_t>(slots_.ptr_v)].setZero();
}

// ---------------------------------------------------------------------------
// PolicyForward

void require_same_shape(std::span<const Instance> batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  for (const auto& inst : batch)
    if (inst.n_jobs() != batch[0].n_jobs() || inst.n_machines() != batch[0].n_machines())
      throw ValidationError("batch mixes instance shapes " + std::to_string(batch[0].n_jobs()) + "x" +
                            std::to_string(batch[0].n_machines()) + " and " + std::to_string(inst.n_jobs()) + "x" +
                            std::to_string(inst.n_machines()));
}

std::vector<SeqEncoding> encode_batch(std::span<const Instance> batch) {
  std::vector<SeqEncoding> out;
  out.reserve(batch.size());
  for (const auto& inst : batch) out.push_back(encode_instance(inst));
  return out;
}

template <typename T>
PolicyForward<T>::PolicyForward(const PolicyModel<T>& model, ad::Tape<T>& tape, ad::NormMode mode,
                                std::vector<ad::BatchNormStats<T>>* stats_update, bool params_require_grad)
    : model_(model), tape_(tape), mode_(mode), stats_update_(stats_update) {
  params_.reserve(model.parameters().size());
  for (const auto& m : model.parameters()) params_.push_back(tape.leaf(m, params_require_grad));
}

template <typename T>
ad::Var PolicyForward<T>::norm(ad::Var x, const typename PolicyModel<T>::NormSlot& slot) {
  const auto k = static_cast<std::size_t>(slot.stats);
  auto* update = stats_update_ ? &(*stats_update_)[k] : nullptr;
  return tape_.batch_norm(x, p(slot.gamma), p(slot.beta), mode_, &model_.norm_stats()[k], update);
}

template <typename T>
ad::Var PolicyForward<T>::embed(std::span<const SeqEncoding> batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  const auto rows = batch[0].rows.size();
  for (const auto& seq : batch)
    if (seq.n_jobs != batch[0].n_jobs || seq.n_machines != batch[0].n_machines || seq.rows.size() != rows)
      throw ValidationError("batch mixes instance shapes");
  const auto total = static_cast<Eigen::Index>(rows * batch.size());
  ad::Matrix<T> ij(total, 2);
  ad::Matrix<T> mp(total, 2);
  Eigen::Index r = 0;
  for (const auto& seq : batch)
    for (const auto& row : seq.rows) {
      ij(r, 0) = static_cast<T>(row[0]);
      ij(r, 1) = static_cast<T>(row[1]);
      mp(r, 0) = static_cast<T>(row[2]);
      mp(r, 1) = static_cast<T>(row[3]);
      ++r;
    }
  const auto& s = model_.slots();
  auto e_ij = tape_.linear(norm(tape_.constant(std::move(ij)), s.norm_ij), p(s.w_ij), p(s.b_ij));
  auto e_mp = tape_.linear(norm(tape_.constant(std::move(mp)), s.norm_mp), p(s.w_mp), p(s.b_mp));
  return tape_.linear(norm(tape_.add(e_ij, e_mp), s.norm_sum), p(s.w_post), p(s.b_post));
}

template <typename T>
Encoded PolicyForward<T>::encode(ad::Var X, int instances, int rows) {
  const auto& cfg = model_.config();
  auto h = X;
  for (const auto& l : model_.slots().layers) {
    auto q = tape_.linear(h, p(l.wq));
    auto k = tape_.linear(h, p(l.wk));
    auto v = tape_.linear(h, p(l.wv));
    auto att = tape_.linear(tape_.attention(q, k, v, cfg.n_heads, rows), p(l.wo));
    h = norm(tape_.add(h, att), l.norm1);
    auto ff = tape_.linear(tape_.relu(tape_.linear(h, p(l.ff1_w), p(l.ff1_b))), p(l.ff2_w), p(l.ff2_b));
    h = norm(tape_.add(h, ff), l.norm2);
  }
  return {h, tape_.block_mean(h, rows), instances, rows};
}

template <typename T>
Encoded PolicyForward<T>::embed_and_encode(std::span<const Instance> batch) {
  require_same_shape(batch);
  auto seqs = encode_batch(batch);
  return encode(embed(seqs), static_cast<int>(batch.size()), batch[0].n_ops());
}

template <typename T>
typename PolicyForward<T>::DecoderState PolicyForward<T>::init_decoder(const Encoded& enc,
                                                                       std::span<const int> lane_instance) {
  const auto& s = model_.slots();
  auto init = tape_.linear(enc.mean, p(s.w_init), p(s.b_init));
  std::vector<int> idx(lane_instance.begin(), lane_instance.end());
  return {tape_.gather_rows(init, std::move(idx)), tape_.broadcast_row(p(s.start), static_cast<int>(lane_instance.size()))};
}

template <typename T>
ad::Var PolicyForward<T>::pointer_keys(const Encoded& enc) {
  return tape_.linear(enc.H, p(model_.slots().ptr_keys));
}

template <typename T>
ad::Var PolicyForward<T>::decode_step(DecoderState& state, ad::Var keys, const Encoded& enc,
                                      std::span<const int> lane_instance, const MaskState& masks) {
  const auto& s = model_.slots();
  auto& t = tape_;
  auto x = state.input;
  auto h = state.hidden;
  auto gate = [&](int g) { return t.add(t.linear(x, p(s.gru_wx[g]), p(s.gru_bx[g])), t.linear(h, p(s.gru_wh[g]), p(s.gru_bh[g]))); };
  auto r = t.sigmoid(gate(0));
  auto z = t.sigmoid(gate(1));
  auto cand = t.tanh(t.add(t.linear(x, p(s.gru_wx[2]), p(s.gru_bx[2])),
                           t.mul(r, t.linear(h, p(s.gru_wh[2]), p(s.gru_bh[2])))));
  state.hidden = t.add(t.mul(t.one_minus(z), cand), t.mul(z, h));

  const int lanes = static_cast<int>(lane_instance.size());
  const int rows = enc.rows;
  if (masks.batch() != lanes || masks.rows() != rows) throw ContractViolation("mask shape does not match decoder lanes");
  std::vector<std::uint8_t> selectable(static_cast<std::size_t>(lanes * rows));
  for (int l = 0; l < lanes; ++l) {
    bool any = false;
    for (int q = 0; q < rows; ++q) {
      const bool ok = masks.selectable(l, q);
      selectable[static_cast<std::size_t>(l * rows + q)] = ok;
      any |= ok;
    }
    if (!any) throw ContractViolation("decode step with every row masked in lane " + std::to_string(l));
  }
  std::optional<T> clip;
  if (model_.config().score_clip) clip = static_cast<T>(*model_.config().score_clip);
  auto query = t.linear(state.hidden, p(s.ptr_query));
  return t.pointer_log_softmax(keys, query, p(s.ptr_v), std::vector<int>(lane_instance.begin(), lane_instance.end()), rows,
                               selectable, clip);
}

template <typename T>
void PolicyForward<T>::feed(DecoderState& state, const Encoded& enc, std::span<const int> lane_instance,
                            std::span<const int> rows) {
  std::vector<int> idx(rows.size());
  for (std::size_t l = 0; l < rows.size(); ++l) idx[l] = lane_instance[l] * enc.rows + rows[l];
  state.input = tape_.gather_rows(enc.H, std::move(idx));
}

template <typename T>
DecodeOutput PolicyForward<T>::decode(const Encoded& enc, std::span<const int> lane_instance, int n_jobs,
                                      int n_machines, DecodeMode mode, Rng* rng, std::span<const DispatchList> forced,
                                      ProblemMode problem) {
  const int lanes = static_cast<int>(lane_instance.size());
  const int rows = n_jobs * n_machines;
  if (rows != enc.rows) throw ValidationError("decode shape does not match the encoded batch");
  if (mode == DecodeMode::Sample && !rng) throw std::logic_error("sampling needs an rng");
  if (mode == DecodeMode::Forced) {
    if (forced.size() != static_cast<std::size_t>(lanes)) throw ValidationError("need one forced list per lane");
    for (const auto& list : forced)
      if (list.size() != static_cast<std::size_t>(rows)) throw ValidationError("forced list has the wrong length");
  }

  auto masks = init_masks(lanes, n_jobs, n_machines, problem);
  auto state = init_decoder(enc, lane_instance);
  auto keys = pointer_keys(enc);
  DecodeOutput out;
  out.lists.assign(static_cast<std::size_t>(lanes), DispatchList{});
  for (auto& l : out.lists) l.perm.reserve(static_cast<std::size_t>(rows));
  std::vector<int> chosen(static_cast<std::size_t>(lanes));
  ad::Var total;
  for (int step = 0; step < rows; ++step) {
    auto logp = decode_step(state, keys, enc, lane_instance, masks);
    const auto& lp = tape_.value(logp);
    for (int l = 0; l < lanes; ++l) {
      int pick = -1;
      if (mode == DecodeMode::Forced) {
        pick = forced[static_cast<std::size_t>(l)].perm[static_cast<std::size_t>(step)];
        if (pick < 0 || pick >= rows || !masks.selectable(l, pick))
          throw ValidationError("forced list for lane " + std::to_string(l) + " is infeasible at step " +
                                std::to_string(step));
      } else if (mode == DecodeMode::Greedy) {
        T best = -std::numeric_limits<T>::infinity();
        for (int q = 0; q < rows; ++q)
          if (masks.selectable(l, q) && (pick < 0 || lp(l, q) > best)) {
            best = lp(l, q);
            pick = q;
          }
      } else {
        const double u = rng->uniform01();
        double cum = 0;
        for (int q = 0; q < rows; ++q) {
          if (!masks.selectable(l, q)) continue;
          pick = q;
          cum += std::exp(static_cast<double>(lp(l, q)));
          if (u < cum) break;
        }
      }
      chosen[static_cast<std::size_t>(l)] = pick;
    }
    auto picked = tape_.pick(logp, chosen);
    total = step == 0 ? picked : tape_.add(total, picked);
    for (int l = 0; l < lanes; ++l) {
      masks.step(l, chosen[static_cast<std::size_t>(l)]);
      out.lists[static_cast<std::size_t>(l)].perm.push_back(chosen[static_cast<std::size_t>(l)]);
    }
    feed(state, enc, lane_instance, chosen);
  }
  out.log_prob = total;
  const auto& tv = tape_.value(total);
  out.log_probs.resize(static_cast<std::size_t>(lanes));
  for (int l = 0; l < lanes; ++l) out.log_probs[static_cast<std::size_t>(l)] = static_cast<double>(tv(l, 0));
  return out;
}

template <typename T>
std::vector<T> PolicyForward<T>::flat_grad() const {
  std::vector<T> out;
  out.reserve(model_.parameter_count());
  for (auto v : params_) {
    auto g = tape_.grad(v);
    out.insert(out.end(), g.data(), g.data() + g.size());
  }
  return out;
}

// ---------------------------------------------------------------------------

template <typename T>
std::vector<Rollout> rollout(const PolicyModel<T>& model, std::span<const Instance> batch, DecodeMode mode, Rng* rng,
                             BuildMode build, int samples, ad::NormMode norm) {
  if (mode == DecodeMode::Forced) throw std::logic_error("rollout does not take forced lists");
  if (samples < 1) throw ValidationError("samples must be >= 1");
  require_same_shape(batch);
  ad::Tape<T> tape(false);
  PolicyForward<T> fwd(model, tape, norm == ad::NormMode::Train ? ad::NormMode::TrainFrozen : norm, nullptr, false);
  auto enc = fwd.embed_and_encode(batch);
  std::vector<int> lanes;
  for (int b = 0; b < static_cast<int>(batch.size()); ++b)
    for (int s = 0; s < samples; ++s) lanes.push_back(b);
  auto dec = fwd.decode(enc, lanes, batch[0].n_jobs(), batch[0].n_machines(), mode, rng);
  std::vector<Rollout> out;
  out.reserve(lanes.size());
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    const auto& inst = batch[static_cast<std::size_t>(lanes[l])];
    const int cmax = build_schedule(inst, dec.lists[l], build).makespan();
    out.push_back({std::move(dec.lists[l]), dec.log_probs[l], cmax, mode});
  }
  return out;
}

template <typename T>
LogProbGrad<T> log_prob_and_grad(const PolicyModel<T>& model, std::span<const Instance> batch,
                                 std::span<const DispatchList> lists, std::span<const double> weights,
                                 ad::NormMode norm) {
  require_same_shape(batch);
  if (lists.size() != batch.size() || weights.size() != batch.size())
    throw ValidationError("need one list and one weight per instance");
  for (std::size_t k = 0; k < batch.size(); ++k) {
    auto report = check_feasible(lists[k], batch[k]);
    if (!report) throw ValidationError("infeasible list for instance " + std::to_string(k) + ": " +
                                       report.violation->describe());
  }
  ad::Tape<T> tape(true);
  PolicyForward<T> fwd(model, tape, norm == ad::NormMode::Train ? ad::NormMode::TrainFrozen : norm);
  auto enc = fwd.embed_and_encode(batch);
  std::vector<int> lanes(batch.size());
  std::iota(lanes.begin(), lanes.end(), 0);
  auto dec = fwd.decode(enc, lanes, batch[0].n_jobs(), batch[0].n_machines(), DecodeMode::Forced, nullptr, lists);
  std::vector<T> w(weights.begin(), weights.end());
  auto loss = tape.weighted_sum(dec.log_prob, std::move(w));
  tape.backward(loss);
  return {dec.log_probs, fwd.flat_grad()};
}

template class PolicyModel<float>;
template class PolicyModel<double>;
template class PolicyForward<float>;
template class PolicyForward<double>;
template std::vector<Rollout> rollout(const PolicyModel<float>&, std::span<const Instance>, DecodeMode, Rng*, BuildMode,
                                      int, ad::NormMode);
template std::vector<Rollout> rollout(const PolicyModel<double>&, std::span<const Instance>, DecodeMode, Rng*, BuildMode,
                                      int, ad::NormMode);
template LogProbGrad<float> log_prob_and_grad(const PolicyModel<float>&, std::span<const Instance>,
                                              std::span<const DispatchList>, std::span<const double>, ad::NormMode);
template LogProbGrad<double> log_prob_and_grad(const PolicyModel<double>&, std::span<const Instance>,
                                               std::span<const DispatchList>, std::span<const double>, ad::NormMode);

}  // namespace seqjsp
