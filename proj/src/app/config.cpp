#include "bellab/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bellab/errors.hpp"

namespace bellab::app {

using nlohmann::json;

namespace {

// Tracks which keys of a JSON object were read so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  const json* get(const std::string& key) {
    consumed_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!consumed_.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where_);
    }
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> consumed_;
};

std::uint64_t as_unsigned(const json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(what + " must be a non-negative integer");
}

std::uint64_t as_positive(const json& v, const std::string& what) {
  const auto n = as_unsigned(v, what);
  if (n == 0) throw ConfigError(what + " must be positive");
  return n;
}

double as_real(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(what + " must be finite");
  return x;
}

bool as_bool(const json& v, const std::string& what) {
  if (!v.is_boolean()) throw ConfigError(what + " must be true or false");
  return v.get<bool>();
}

// Angle reader bound to the document's "units" field.
class Units {
 public:
  explicit Units(const json* units) {
    if (!units) return;
    if (*units == "deg") {
      to_radians_ = kPi / 180.0;
    } else if (*units == "rad") {
      to_radians_ = 1.0;
    } else {
      throw ConfigError("units must be \"deg\" or \"rad\"");
    }
  }

  double angle(const json& v, const std::string& what) const {
    if (!to_radians_) throw ConfigError("\"units\" (\"deg\" or \"rad\") is required because " + what + " is an angle");
    return as_real(v, what) * *to_radians_;
  }

 private:
  std::optional<double> to_radians_;
};

Outcome as_outcome(const json& v, const std::string& what) {
  if (v == 1) return Outcome::pass;
  if (v == -1) return Outcome::absorb;
  throw ConfigError(what + " must be +1 or -1");
}

TableConfig parse_table(const json& v, const Units& units, const std::string& what) {
  if (v.is_number()) return as_outcome(v, what);
  if (!v.is_array() || v.empty()) throw ConfigError(what + " must be +1, -1 or a list of [setting, outcome] pairs");
  std::vector<std::pair<double, Outcome>> entries;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2) throw ConfigError(what + " entries must be [setting, outcome] pairs");
    entries.emplace_back(units.angle(e[0], what + " setting"), as_outcome(e[1], what + " outcome"));
  }
  return entries;
}

AtomConfig parse_atom(const json& v, const Units& units, const std::string& where) {
  ObjectReader r(v, where);
  AtomConfig atom;
  const json* id = r.get("lambda_id");
  if (!id || !id->is_number_integer()) throw ConfigError(r.path("lambda_id") + " must be an integer");
  atom.lambda_id = id->get<std::int64_t>();
  const json* a = r.get("a");
  const json* b = r.get("b");
  if (!a || !b) throw ConfigError(where + " needs outcome tables \"a\" and \"b\"");
  atom.a = parse_table(*a, units, r.path("a"));
  atom.b = parse_table(*b, units, r.path("b"));
  if (const json* reg = r.get("registered_at")) {
    if (!reg->is_array() || reg->size() != 2) throw ConfigError(r.path("registered_at") + " must be [a, b]");
    atom.registered_at = std::pair{units.angle((*reg)[0], r.path("registered_at")),
                                   units.angle((*reg)[1], r.path("registered_at"))};
  }
  r.finish();
  return atom;
}

const std::vector<std::string> kModelNames = {"qm-singlet", "qm-parallel", "factorized-sign", "conditional-malus",
                                              "atomized"};

ModelConfig parse_model(ObjectReader& top, const Units& units) {
  ModelConfig model;
  if (const json* name = top.get("model")) {
    if (!name->is_string()) throw ConfigError("model must be a string");
    model.name = name->get<std::string>();
  }
  if (std::find(kModelNames.begin(), kModelNames.end(), model.name) == kModelNames.end()) {
    throw ConfigError("unknown model \"" + model.name +
                      "\" (expected qm-singlet, qm-parallel, factorized-sign, conditional-malus or atomized)");
  }

  const json* params = top.get("model_params");
  const json empty = json::object();
  ObjectReader r(params ? *params : empty, "model_params");
  if (model.name == "factorized-sign") {
    if (const json* off = r.get("offset")) model.offset = units.angle(*off, "model_params.offset");
  } else if (model.name == "atomized") {
    const json* atoms = r.get("atoms");
    const json* random = r.get("random_atoms");
    const json* settings = r.get("settings");
    if ((atoms != nullptr) == (random != nullptr)) {
      throw ConfigError("atomized model needs exactly one of model_params.atoms or model_params.random_atoms");
    }
    if (atoms) {
      if (!atoms->is_array() || atoms->empty()) throw ConfigError("model_params.atoms must be a non-empty list");
      if (settings) throw ConfigError("model_params.settings only applies to random_atoms");
      for (std::size_t i = 0; i < atoms->size(); ++i) {
        model.atoms.push_back(parse_atom((*atoms)[i], units, "model_params.atoms[" + std::to_string(i) + "]"));
      }
    } else {
      model.random_atoms = as_positive(*random, "model_params.random_atoms");
      if (!settings || !settings->is_array() || settings->empty()) {
        throw ConfigError("model_params.random_atoms needs a non-empty settings list");
      }
      for (const auto& s : *settings) model.settings.push_back(units.angle(s, "model_params.settings"));
    }
  }
  r.finish();
  return model;
}

SamplingConfig parse_sampling(ObjectReader& top, const Overrides& overrides) {
  SamplingConfig s;
  if (const json* v = top.get("trials")) s.trials = as_unsigned(*v, "trials");
  if (const json* v = top.get("seed")) s.seed = as_unsigned(*v, "seed");
  if (overrides.seed) s.seed = overrides.seed;
  if (const json* v = top.get("partitions")) s.partitions = as_positive(*v, "partitions");
  if (const json* v = top.get("workers")) s.workers = as_unsigned(*v, "workers");
  if (const json* v = top.get("quadrature_points")) s.quadrature_points = as_unsigned(*v, "quadrature_points");
  if (s.quadrature_points < kMinQuadraturePoints) {
    throw ConfigError("quadrature_points must be at least " + std::to_string(kMinQuadraturePoints));
  }
  return s;
}

void require_seed_if_stochastic(const SamplingConfig& s, const ModelConfig& model) {
  if ((s.trials > 0 || model_is_stochastic(model)) && !s.seed) {
    throw ConfigError("a seed is required for stochastic runs (set \"seed\" or pass --seed)");
  }
}

std::vector<double> parse_deltas(ObjectReader& top, const Units& units) {
  const json* list = top.get("deltas");
  const json* grid = top.get("delta_grid");
  if (list && grid) throw ConfigError("give either deltas or delta_grid, not both");
  std::vector<double> out;
  if (list) {
    if (!list->is_array() || list->empty()) throw ConfigError("deltas must be a non-empty list");
    for (const auto& d : *list) out.push_back(units.angle(d, "deltas"));
    return out;
  }
  if (!grid) {
    // 0 to pi/2 in steps of pi/36
    for (int i = 0; i <= 18; ++i) out.push_back(i * kPi / 36);
    return out;
  }
  ObjectReader r(*grid, "delta_grid");
  const json* start = r.get("start");
  const json* stop = r.get("stop");
  const json* step = r.get("step");
  if (!start || !stop || !step) throw ConfigError("delta_grid needs start, stop and step");
  r.finish();
  // count in the given units so "0..90 step 5" yields exactly 19 rows
  const double lo = as_real(*start, "delta_grid.start");
  const double hi = as_real(*stop, "delta_grid.stop");
  const double dx = as_real(*step, "delta_grid.step");
  if (!(dx > 0) || hi < lo) throw ConfigError("delta_grid needs step > 0 and stop >= start");
  const double span = (hi - lo) / dx;
  if (span > 1e7) throw ConfigError("delta_grid has too many points");
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(units.angle(json(lo + static_cast<double>(i) * dx), "delta_grid"));
  }
  return out;
}

Units read_units(ObjectReader& top) { return Units(top.get("units")); }

}  // namespace

OutputSettings take_output_settings(json& doc) {
  OutputSettings s;
  if (!doc.is_object()) return s;
  if (auto it = doc.find("out"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("out must be a string");
    s.out = it->get<std::string>();
    doc.erase(it);
  }
  if (auto it = doc.find("format"); it != doc.end()) {
    if (*it != "csv" && *it != "json") throw ConfigError("format must be \"csv\" or \"json\"");
    s.format = it->get<std::string>();
    doc.erase(it);
  }
  return s;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

bool model_is_stochastic(const ModelConfig& model) { return model.random_atoms.has_value(); }

Source build_source(const ModelConfig& model, const std::optional<std::uint64_t>& seed) {
  if (model.name == "qm-singlet") return make_singlet();
  if (model.name == "qm-parallel") return make_parallel();
  if (model.name == "factorized-sign") return make_factorized_sign(Angle(model.offset));
  if (model.name == "conditional-malus") return make_conditional_malus();

  auto to_table = [](const TableConfig& t) {
    if (const auto* c = std::get_if<Outcome>(&t)) return constant_table(*c);
    std::vector<std::pair<Angle, Outcome>> entries;
    for (const auto& [angle, o] : std::get<1>(t)) entries.emplace_back(Angle(angle), o);
    return lookup_table(std::move(entries));
  };
  if (model.random_atoms) {
    if (!seed) throw ConfigError("random_atoms needs a seed");
    std::vector<Angle> settings;
    for (double s : model.settings) settings.emplace_back(s);
    // tables draw from a stream separate from any trial partition
    RandomStream rng(*seed, std::uint64_t{1} << 32);
    return random_atomized(*model.random_atoms, settings, rng);
  }
  std::vector<Atom> atoms;
  for (const auto& a : model.atoms) {
    Atom atom{a.lambda_id, to_table(a.a), to_table(a.b), std::nullopt};
    if (a.registered_at) atom.registered_at = SettingPair{Angle(a.registered_at->first), Angle(a.registered_at->second)};
    atoms.push_back(std::move(atom));
  }
  try {
    return make_atomized(std::move(atoms));
  } catch (const InvalidModelError& e) {
    throw ConfigError(std::string("model_params.atoms: ") + e.what());
  }
}

CorrelateConfig parse_correlate(const json& doc, const Overrides& overrides) {
  ObjectReader top(doc, "config");
  const Units units = read_units(top);
  CorrelateConfig c;
  c.model = parse_model(top, units);
  c.deltas = parse_deltas(top, units);
  c.sampling = parse_sampling(top, overrides);
  top.finish();
  require_seed_if_stochastic(c.sampling, c.model);
  return c;
}

ChshConfig parse_chsh(const json& doc, const Overrides& overrides) {
  ObjectReader top(doc, "config");
  const Units units = read_units(top);
  ChshConfig c;
  c.model = parse_model(top, units);
  if (const json* q = top.get("quadruple")) {
    ObjectReader r(*q, "quadruple");
    auto read = [&](const char* key) {
      const json* v = r.get(key);
      if (!v) throw ConfigError(std::string("quadruple needs ") + key);
      return Angle(units.angle(*v, r.path(key)));
    };
    c.quadruple = ChshQuadruple{read("a"), read("a_prime"), read("b"), read("b_prime")};
    r.finish();
  }
  if (const json* m = top.get("maximize")) c.maximize = as_bool(*m, "maximize");
  if (const json* g = top.get("grid_step")) c.grid_step = units.angle(*g, "grid_step");
  c.sampling = parse_sampling(top, overrides);
  top.finish();
  if (c.maximize == c.quadruple.has_value()) {
    throw ConfigError("chsh needs exactly one of an explicit quadruple or \"maximize\": true");
  }
  if (c.maximize && c.sampling.trials > 0) throw ConfigError("maximize runs on the analytic path; drop trials");
  if (!c.maximize && top.has("grid_step")) throw ConfigError("grid_step only applies with maximize");
  require_seed_if_stochastic(c.sampling, c.model);
  return c;
}

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names = {
      "bounds",       "bounds-violation-demo", "zero-identity", "step-ss",
      "bell",         "chsh-consistency",      "cross-terms",   "degenerate",
      "degenerate-singlet-demo", "conditional-demo"};
  return names;
}

VerifyConfig parse_verify(const json& doc, const Overrides& overrides) {
  ObjectReader top(doc, "config");
  const Units units = read_units(top);
  VerifyConfig c;
  const auto& known = verify_check_names();
  if (const json* checks = top.get("checks")) {
    if (!checks->is_array() || checks->empty()) throw ConfigError("checks must be a non-empty list of names");
    for (const auto& name : *checks) {
      if (!name.is_string() || std::find(known.begin(), known.end(), name.get<std::string>()) == known.end()) {
        throw ConfigError("unknown check " + name.dump());
      }
      c.checks.push_back(name.get<std::string>());
    }
  } else {
    c.checks = known;
  }
  if (const json* v = top.get("seed")) c.seed = as_unsigned(*v, "seed");
  if (overrides.seed) c.seed = overrides.seed;
  if (const json* v = top.get("grid_step")) c.grid_step = units.angle(*v, "grid_step");
  if (const json* v = top.get("atomized_sizes")) {
    if (!v->is_array() || v->empty()) throw ConfigError("atomized_sizes must be a non-empty list");
    c.atomized_sizes.clear();
    for (const auto& n : *v) {
      const auto size = as_positive(n, "atomized_sizes");
      if (size > 2000) throw ConfigError("atomized_sizes entries must be at most 2000");
      c.atomized_sizes.push_back(size);
    }
  }
  if (const json* v = top.get("zero_identity_draws")) c.zero_identity_draws = as_positive(*v, "zero_identity_draws");
  if (const json* v = top.get("ss_quadruples")) c.ss_quadruples = as_unsigned(*v, "ss_quadruples");
  if (const json* v = top.get("demo_trials")) c.demo_trials = as_positive(*v, "demo_trials");
  if (const json* v = top.get("quadrature_points")) c.quadrature_points = as_unsigned(*v, "quadrature_points");
  top.finish();
  if (c.quadrature_points < kMinQuadraturePoints) {
    throw ConfigError("quadrature_points must be at least " + std::to_string(kMinQuadraturePoints));
  }
  if (!c.seed) throw ConfigError("verify draws random inputs; a seed is required (set \"seed\" or pass --seed)");
  return c;
}

OscillatorConfig parse_oscillator(const json& doc, const Overrides&) {
  ObjectReader top(doc, "config");
  OscillatorConfig c;
  if (const json* v = top.get("mass")) c.params.mass = as_real(*v, "mass");
  if (const json* v = top.get("omega")) c.params.omega = as_real(*v, "omega");
  if (const json* v = top.get("kappa")) c.params.kappa = as_real(*v, "kappa");
  if (const json* v = top.get("h")) c.params.h = as_real(*v, "h");
  if (const json* v = top.get("initial")) {
    ObjectReader r(*v, "initial");
    double q1 = 0, q2 = 0, p1 = 0, p2 = 0;
    if (const json* x = r.get("q1")) q1 = as_real(*x, "initial.q1");
    if (const json* x = r.get("q2")) q2 = as_real(*x, "initial.q2");
    if (const json* x = r.get("p1")) p1 = as_real(*x, "initial.p1");
    if (const json* x = r.get("p2")) p2 = as_real(*x, "initial.p2");
    r.finish();
    c.initial = PhaseState<double>::make(q1, q2, p1, p2);
  }
  if (const json* v = top.get("dt")) c.dt = as_real(*v, "dt");
  if (const json* v = top.get("steps")) c.steps = as_positive(*v, "steps");
  if (const json* v = top.get("sample_every")) c.sample_every = as_positive(*v, "sample_every");
  if (const json* v = top.get("levels")) {
    const auto k = as_unsigned(*v, "levels");
    if (k > 1000) throw ConfigError("levels must be at most 1000");
    c.levels = static_cast<std::uint32_t>(k);
  }
  if (const json* v = top.get("drift_tolerance")) c.drift_tolerance = as_real(*v, "drift_tolerance");
  top.finish();
  try {
    c.params.validate();
  } catch (const InvalidModelError& e) {
    throw ConfigError(e.what());
  }
  if (c.steps > 100000000) throw ConfigError("steps must be at most 1e8");
  return c;
}

}  // namespace bellab::app
