#include "seqjsp/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "seqjsp/checkpoint.hpp"

namespace seqjsp {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Fields {
 public:
  explicit Fields(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
      if (!body.data().empty() && body.empty()) {
        errors.push_back("key '" + section + "' must be inside a section");
        continue;
      }
      for (const auto& [key, value] : body) values_[section + "." + key] = trim(value.data());
    }
  }

  template <typename U>
  void read(const std::string& name, U& out, bool required = false) {
    seen_.insert(name);
    auto it = values_.find(name);
    if (it == values_.end()) {
      if (required) errors.push_back("missing required key " + name);
      return;
    }
    const auto& s = it->second;
    if constexpr (std::is_same_v<U, std::string>) {
      out = s;
    } else if constexpr (std::is_floating_point_v<U>) {
      std::istringstream in(s);
      in.imbue(std::locale::classic());
      U v{};
      if (!(in >> v) || !(in >> std::ws).eof()) {
        errors.push_back(name + ": expected a number, got '" + s + "'");
        return;
      }
      out = v;
    } else {
      U v{};
      const auto* end = s.data() + s.size();
      auto [p, ec] = std::from_chars(s.data(), end, v);
      if (ec != std::errc() || p != end) {
        errors.push_back(name + ": expected an integer, got '" + s + "'");
        return;
      }
      out = v;
    }
  }

  template <typename Parse, typename U>
  void read_enum(const std::string& name, U& out, Parse parse) {
    std::string s;
    if (!values_.count(name)) {
      seen_.insert(name);
      return;
    }
    read(name, s);
    try {
      out = parse(s);
    } catch (const ValidationError& e) {
      errors.push_back(name + ": " + e.what());
    }
  }

  void report_unknown() {
    for (const auto& [name, value] : values_)
      if (!seen_.count(name)) errors.push_back("unknown key " + name);
  }

  std::vector<std::string> errors;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> seen_;
};

template <typename C>
void collect(const C& config, std::vector<std::string>& errors) {
  try {
    config.validate();
  } catch (const ValidationError& e) {
    std::istringstream lines(e.what());
    std::string line;
    std::getline(lines, line);  // headline
    while (std::getline(lines, line)) errors.push_back(trim(line));
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  Fields f(tree);
  RunConfig c;
  auto& m = c.model;
  f.read("model.d_h", m.d_h);
  f.read("model.n_heads", m.n_heads);
  f.read("model.n_layers", m.n_layers);
  f.read("model.ff_width", m.ff_width);
  {
    std::string clip;
    f.read("model.score_clip", clip);
    if (!clip.empty() && clip != "none") {
      std::istringstream s(clip);
      double v = 0;
      if (s >> v && (s >> std::ws).eof())
        m.score_clip = v;
      else
        f.errors.push_back("model.score_clip: expected a number or 'none', got '" + clip + "'");
    }
  }
  f.read_enum("model.precision", m.precision, parse_precision);

  auto& t = c.trainer;
  f.read("trainer.learning_rate", t.learning_rate, true);
  f.read("trainer.grad_clip", t.grad_clip, true);
  f.read("trainer.batch_size", t.batch_size, true);
  f.read("trainer.epoch_size", t.epoch_size, true);
  f.read("trainer.n_epochs", t.n_epochs, true);
  f.read("trainer.baseline_eval_size", t.baseline_eval_size);
  f.read("trainer.ttest_alpha", t.ttest_alpha);
  f.read("trainer.beta1", t.beta1);
  f.read("trainer.beta2", t.beta2);
  f.read("trainer.epsilon", t.epsilon);
  f.read("trainer.seed", t.seed, true);
  f.read("trainer.log_every", t.log_every);

  auto& d = c.data;
  f.read("data.n_jobs", d.n_jobs, true);
  f.read("data.n_machines", d.n_machines, true);
  f.read_enum("data.kind", d.kind, parse_instance_kind);
  f.read("data.validation_size", d.validation_size);
  f.read("data.validation_seed", d.validation_seed);
  f.read_enum("data.mode", d.mode, parse_build_mode);
  f.report_unknown();

  collect(m, f.errors);
  collect(t, f.errors);
  collect(d, f.errors);
  if (!f.errors.empty()) {
    std::string msg = "invalid config (" + std::to_string(f.errors.size()) + " problem" +
                      (f.errors.size() == 1 ? "" : "s") + "):";
    for (const auto& e : f.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o.precision(17);
  o << "model.d_h = " << c.model.d_h << "\n"
    << "model.n_heads = " << c.model.n_heads << "\n"
    << "model.n_layers = " << c.model.n_layers << "\n"
    << "model.ff_width = " << c.model.ff_width << "\n"
    << "model.score_clip = ";
  if (c.model.score_clip)
    o << *c.model.score_clip;
  else
    o << "none";
  o << "\n"
    << "model.precision = " << to_string(c.model.precision) << "\n"
    << "trainer.learning_rate = " << c.trainer.learning_rate << "\n"
    << "trainer.grad_clip = " << c.trainer.grad_clip << "\n"
    << "trainer.batch_size = " << c.trainer.batch_size << "\n"
    << "trainer.epoch_size = " << c.trainer.epoch_size << "\n"
    << "trainer.n_epochs = " << c.trainer.n_epochs << "\n"
    << "trainer.baseline_eval_size = " << c.trainer.baseline_eval_size << "\n"
    << "trainer.ttest_alpha = " << c.trainer.ttest_alpha << "\n"
    << "trainer.beta1 = " << c.trainer.beta1 << "\n"
    << "trainer.beta2 = " << c.trainer.beta2 << "\n"
    << "trainer.epsilon = " << c.trainer.epsilon << "\n"
    << "trainer.seed = " << c.trainer.seed << "\n"
    << "trainer.log_every = " << c.trainer.log_every << "\n"
    << "data.n_jobs = " << c.data.n_jobs << "\n"
    << "data.n_machines = " << c.data.n_machines << "\n"
    << "data.kind = " << to_string(c.data.kind) << "\n"
    << "data.validation_size = " << c.data.validation_size << "\n"
    << "data.validation_seed = " << c.data.validation_seed << "\n"
    << "data.mode = " << to_string(c.data.mode) << "\n";
  return o.str();
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a(canonical_config(config)); }

}  // namespace seqjsp
