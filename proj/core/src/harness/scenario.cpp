#include "pet/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "pet/errors.hpp"
#include "pet/random.hpp"

namespace pet::harness {

using nlohmann::json;

std::string Scheme::label() const {
  switch (kind) {
    case SchemeKind::pet: return "pet";
    case SchemeKind::secn1: return "secn1";
    case SchemeKind::secn2: return "secn2";
    case SchemeKind::fixed: {
      auto kb = [](Bytes b) { return std::to_string(b / kKiB); };
      return "fixed_" + kb(fixed.k_min) + "_" + kb(fixed.k_max) + "_" +
             std::to_string(static_cast<int>(std::lround(fixed.p_max * 100)));
    }
  }
  return "unknown";
}

queue::EcnConfig scheme_ecn(const Scheme& scheme, double baseline_p_max) {
  switch (scheme.kind) {
    case SchemeKind::secn1: return {5 * kKiB, 200 * kKiB, baseline_p_max};
    case SchemeKind::secn2: return {100 * kKiB, 400 * kKiB, baseline_p_max};
    case SchemeKind::fixed: return scheme.fixed;
    case SchemeKind::pet: return {5 * kKiB, 200 * kKiB, baseline_p_max};
  }
  return {};
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

double opt_number(const json& obj, const char* key, const std::string& prefix, double def) {
  const auto* v = find(obj, key);
  return v ? get_number(*v, prefix + key) : def;
}

std::uint64_t get_uint(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(field, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool opt_bool(const json& obj, const char* key, const std::string& prefix, bool def) {
  const auto* v = find(obj, key);
  if (!v) return def;
  if (!v->is_boolean()) fail(prefix + key, "expected true or false");
  return v->get<bool>();
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

SimTime from_us(double us) { return SimTime{static_cast<SimTime::rep>(std::llround(us * 1e3))}; }
SimTime from_ms(double ms) { return SimTime{static_cast<SimTime::rep>(std::llround(ms * 1e6))}; }

void check_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
  for (const auto& [k, _] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; })) {
      fail(prefix + k, "unknown field");
    }
  }
}

traffic::WorkloadSpec parse_workload(const json& w, const std::string& prefix) {
  if (!w.is_object()) fail(prefix.substr(0, prefix.size() - 1), "expected an object");
  check_keys(w, prefix, {"name", "cdf_file", "incast", "load"});
  traffic::WorkloadSpec spec;
  const auto* name = find(w, "name");
  if (!name) fail(prefix + "name", "missing");
  const auto n = get_string(*name, prefix + "name");
  try {
    spec.name = traffic::workload_name_from_string(n);
  } catch (const std::exception&) {
    fail(prefix + "name", "unknown workload '" + n + "'");
  }
  if (const auto* f = find(w, "cdf_file")) {
    spec.cdf = traffic::load_cdf_file(get_string(*f, prefix + "cdf_file"));
  } else if (spec.name == traffic::WorkloadName::web_search) {
    spec.cdf = traffic::builtin_web_search_cdf();
  } else if (spec.name == traffic::WorkloadName::data_mining) {
    spec.cdf = traffic::builtin_data_mining_cdf();
  } else {
    fail(prefix + "cdf_file", "required for a custom workload");
  }
  if (const auto* inc = find(w, "incast")) {
    const std::string p = prefix + "incast.";
    if (!inc->is_object()) fail(prefix + "incast", "expected an object");
    check_keys(*inc, p, {"fan_in", "period_us", "size_kb"});
    traffic::IncastSpec is;
    if (const auto* v = find(*inc, "fan_in")) is.fan_in = static_cast<std::uint32_t>(get_uint(*v, p + "fan_in"));
    is.period = from_us(opt_number(*inc, "period_us", p, 10'000));
    is.response_size = static_cast<Bytes>(std::llround(opt_number(*inc, "size_kb", p, 64) * kKiB));
    spec.incast = is;
  }
  if (const auto* l = find(w, "load")) spec.load = get_number(*l, prefix + "load");
  return spec;
}

Scheme parse_scheme(const json& s, const std::string& field) {
  Scheme out;
  if (s.is_string()) {
    const auto name = s.get<std::string>();
    if (name == "pet") {
      out.kind = SchemeKind::pet;
    } else if (name == "secn1") {
      out.kind = SchemeKind::secn1;
    } else if (name == "secn2") {
      out.kind = SchemeKind::secn2;
    } else {
      fail(field, "unknown scheme '" + name + "' (expected pet, secn1, secn2 or fixed)");
    }
    return out;
  }
  if (s.is_object() && s.contains("fixed")) {
    const auto& f = s["fixed"];
    const std::string p = field + ".fixed.";
    if (!f.is_object()) fail(field + ".fixed", "expected an object");
    check_keys(f, p, {"k_min_kb", "k_max_kb", "p_max"});
    out.kind = SchemeKind::fixed;
    for (const char* key : {"k_min_kb", "k_max_kb", "p_max"}) {
      if (!f.contains(key)) fail(p + key, "missing");
    }
    out.fixed.k_min = static_cast<Bytes>(std::llround(get_number(f["k_min_kb"], p + "k_min_kb") * kKiB));
    out.fixed.k_max = static_cast<Bytes>(std::llround(get_number(f["k_max_kb"], p + "k_max_kb") * kKiB));
    out.fixed.p_max = get_number(f["p_max"], p + "p_max");
    try {
      queue::validate(out.fixed);
    } catch (const ConfigError& e) {
      fail(field + ".fixed", e.what());
    }
    return out;
  }
  fail(field, "expected a scheme name or {\"fixed\": {...}}");
}

void parse_topology(const json& t, sim::TopologyConfig& cfg) {
  const std::string p = "topology.";
  if (!t.is_object()) fail("topology", "expected an object");
  check_keys(t, p, {"n_spine", "n_leaf", "hosts_per_leaf", "host_rate_gbps", "fabric_rate_gbps",
                    "link_delay_us", "buffer_kb", "mtu"});
  if (const auto* v = find(t, "n_spine")) cfg.n_spine = static_cast<std::uint32_t>(get_uint(*v, p + "n_spine"));
  if (const auto* v = find(t, "n_leaf")) cfg.n_leaf = static_cast<std::uint32_t>(get_uint(*v, p + "n_leaf"));
  if (const auto* v = find(t, "hosts_per_leaf")) {
    cfg.hosts_per_leaf = static_cast<std::uint32_t>(get_uint(*v, p + "hosts_per_leaf"));
  }
  cfg.host_link.rate = static_cast<BitsPerSec>(std::llround(
      opt_number(t, "host_rate_gbps", p, static_cast<double>(cfg.host_link.rate) / 1e9) * 1e9));
  cfg.fabric_link.rate = static_cast<BitsPerSec>(std::llround(
      opt_number(t, "fabric_rate_gbps", p, static_cast<double>(cfg.fabric_link.rate) / 1e9) * 1e9));
  const auto delay = from_us(opt_number(t, "link_delay_us", p, static_cast<double>(cfg.host_link.delay.count()) / 1e3));
  cfg.host_link.delay = delay;
  cfg.fabric_link.delay = delay;
  if (const auto* v = find(t, "buffer_kb")) {
    cfg.buffer_capacity = static_cast<Bytes>(std::llround(get_number(*v, p + "buffer_kb") * kKiB));
  }
  if (const auto* v = find(t, "mtu")) cfg.mtu = get_uint(*v, p + "mtu");
  try {
    sim::validate(cfg);
  } catch (const ConfigError& e) {
    fail("topology", e.what());
  }
}

void parse_pet(const json& j, PetOptions& pet) {
  const std::string p = "pet.";
  if (!j.is_object()) fail("pet", "expected an object");
  check_keys(j, p, {"checkpoint", "pretrain_episodes", "pretrain_episode_ms", "mode", "beta1",
                    "gae_preset", "delta_t_us", "mask_incast", "mask_ratio", "hyperparams"});
  if (const auto* v = find(j, "checkpoint")) pet.checkpoint = get_string(*v, p + "checkpoint");
  if (const auto* v = find(j, "pretrain_episodes")) {
    pet.pretrain_episodes = static_cast<std::uint32_t>(get_uint(*v, p + "pretrain_episodes"));
  }
  pet.pretrain_episode = from_ms(opt_number(j, "pretrain_episode_ms", p, 100));
  if (const auto* v = find(j, "mode")) {
    const auto m = get_string(*v, p + "mode");
    if (m == "online") {
      pet.mode = agent::AgentMode::online;
    } else if (m == "frozen_eval") {
      pet.mode = agent::AgentMode::frozen_eval;
    } else {
      fail(p + "mode", "expected 'online' or 'frozen_eval'");
    }
  }
  if (const auto* v = find(j, "beta1")) pet.beta1 = get_number(*v, p + "beta1");
  if (const auto* v = find(j, "gae_preset")) {
    const auto g = get_string(*v, p + "gae_preset");
    if (g == "standard") {
      pet.hp = learn::with_gae_preset(pet.hp, learn::GaePreset::standard);
    } else if (g == "low_lambda") {
      pet.hp = learn::with_gae_preset(pet.hp, learn::GaePreset::low_lambda);
    } else {
      fail(p + "gae_preset", "expected 'standard' or 'low_lambda'");
    }
  }
  pet.delta_t = from_us(opt_number(j, "delta_t_us", p, 0));
  pet.mask_incast = opt_bool(j, "mask_incast", p, false);
  pet.mask_ratio = opt_bool(j, "mask_ratio", p, false);
  if (const auto* h = find(j, "hyperparams")) {
    const std::string hp = p + "hyperparams.";
    if (!h->is_object()) fail(p + "hyperparams", "expected an object");
    check_keys(*h, hp, {"gamma", "lambda", "clip", "lr_actor", "lr_critic", "epochs", "rollout_len",
                        "minibatch", "eps0", "decay_rate", "decay_step", "alpha_kb"});
    auto& H = pet.hp;
    H.gamma = opt_number(*h, "gamma", hp, H.gamma);
    H.lambda = opt_number(*h, "lambda", hp, H.lambda);
    H.clip = opt_number(*h, "clip", hp, H.clip);
    H.lr_actor = opt_number(*h, "lr_actor", hp, H.lr_actor);
    H.lr_critic = opt_number(*h, "lr_critic", hp, H.lr_critic);
    if (const auto* v = find(*h, "epochs")) H.epochs = static_cast<std::uint32_t>(get_uint(*v, hp + "epochs"));
    if (const auto* v = find(*h, "rollout_len")) {
      H.rollout_len = static_cast<std::uint32_t>(get_uint(*v, hp + "rollout_len"));
    }
    if (const auto* v = find(*h, "minibatch")) H.minibatch = static_cast<std::uint32_t>(get_uint(*v, hp + "minibatch"));
    H.eps0 = opt_number(*h, "eps0", hp, H.eps0);
    H.decay_rate = opt_number(*h, "decay_rate", hp, H.decay_rate);
    H.decay_step = opt_number(*h, "decay_step", hp, H.decay_step);
    H.alpha_kb = opt_number(*h, "alpha_kb", hp, H.alpha_kb);
  }
  try {
    learn::validate(pet.hp);
  } catch (const ConfigError& e) {
    fail(p + "hyperparams", e.what());
  }
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("<root>", "expected a JSON object");
  check_keys(doc, "", {"name", "topology", "workload", "switches", "loads", "load", "scheme",
                       "schemes", "baseline_p_max", "failures", "duration_ms", "drain",
                       "drain_limit_ms", "seeds", "queue_sample_us", "state_log", "pet"});
  Scenario s;
  s.source = doc;
  if (const auto* v = find(doc, "name")) s.name = get_string(*v, "name");
  if (const auto* v = find(doc, "topology")) parse_topology(*v, s.topology);

  const auto* w = find(doc, "workload");
  if (!w) fail("workload", "missing");
  s.workload = parse_workload(*w, "workload.");

  if (const auto* sw = find(doc, "switches")) {
    if (!sw->is_array()) fail("switches", "expected an array");
    for (std::size_t i = 0; i < sw->size(); ++i) {
      const std::string p = "switches[" + std::to_string(i) + "].";
      const auto& e = (*sw)[i];
      if (!e.is_object()) fail(p.substr(0, p.size() - 1), "expected an object");
      check_keys(e, p, {"at_ms", "workload"});
      if (!e.contains("at_ms")) fail(p + "at_ms", "missing");
      if (!e.contains("workload")) fail(p + "workload", "missing");
      s.switches.push_back({from_ms(get_number(e["at_ms"], p + "at_ms")),
                            parse_workload(e["workload"], p + "workload.")});
    }
  }

  if (doc.contains("load") && doc.contains("loads")) fail("loads", "give either 'load' or 'loads'");
  if (const auto* v = find(doc, "load")) {
    s.loads = {get_number(*v, "load")};
  } else if (const auto* v = find(doc, "loads")) {
    if (!v->is_array() || v->empty()) fail("loads", "expected a non-empty array");
    s.loads.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      s.loads.push_back(get_number((*v)[i], "loads[" + std::to_string(i) + "]"));
    }
  } else {
    s.loads = {s.workload.load};
  }

  if (doc.contains("scheme") && doc.contains("schemes")) fail("schemes", "give either 'scheme' or 'schemes'");
  if (const auto* v = find(doc, "scheme")) {
    s.schemes = {parse_scheme(*v, "scheme")};
  } else if (const auto* v = find(doc, "schemes")) {
    if (!v->is_array() || v->empty()) fail("schemes", "expected a non-empty array");
    s.schemes.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      s.schemes.push_back(parse_scheme((*v)[i], "schemes[" + std::to_string(i) + "]"));
    }
  }
  s.baseline_p_max = opt_number(doc, "baseline_p_max", "", s.baseline_p_max);

  if (const auto* f = find(doc, "failures")) {
    if (!f->is_object()) fail("failures", "expected an object");
    check_keys(*f, "failures.", {"fraction", "down_at_ms", "up_at_ms"});
    FailureSpec fs;
    fs.fraction = opt_number(*f, "fraction", "failures.", fs.fraction);
    if (!f->contains("down_at_ms")) fail("failures.down_at_ms", "missing");
    if (!f->contains("up_at_ms")) fail("failures.up_at_ms", "missing");
    fs.down_at = from_ms(get_number((*f)["down_at_ms"], "failures.down_at_ms"));
    fs.up_at = from_ms(get_number((*f)["up_at_ms"], "failures.up_at_ms"));
    s.failures = fs;
  }

  s.duration = from_ms(opt_number(doc, "duration_ms", "", 100));
  s.drain = opt_bool(doc, "drain", "", true);
  s.drain_limit = from_ms(opt_number(doc, "drain_limit_ms", "", 1000));
  if (const auto* v = find(doc, "seeds")) {
    if (!v->is_array() || v->empty()) fail("seeds", "expected a non-empty array");
    s.seeds.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      s.seeds.push_back(get_uint((*v)[i], "seeds[" + std::to_string(i) + "]"));
    }
  }
  s.queue_sample = from_us(opt_number(doc, "queue_sample_us", "", 100));
  s.state_log = opt_bool(doc, "state_log", "", false);
  if (const auto* v = find(doc, "pet")) parse_pet(*v, s.pet);

  validate(s);
  return s;
}

void validate(const Scenario& s) {
  sim::validate(s.topology);
  for (std::size_t i = 0; i < s.loads.size(); ++i) {
    if (!(s.loads[i] > 0 && s.loads[i] <= 1.0)) {
      fail("loads[" + std::to_string(i) + "]", "must lie in (0, 1]");
    }
  }
  if (!(s.baseline_p_max > 0 && s.baseline_p_max <= 1)) fail("baseline_p_max", "must lie in (0, 1]");
  if (s.duration <= SimTime{0}) fail("duration_ms", "must be > 0");
  if (s.queue_sample <= SimTime{0}) fail("queue_sample_us", "must be > 0");
  if (s.seeds.empty()) fail("seeds", "must not be empty");
  SimTime prev{0};
  for (std::size_t i = 0; i < s.switches.size(); ++i) {
    const auto at = s.switches[i].at;
    if (at <= prev && i > 0) fail("switches[" + std::to_string(i) + "].at_ms", "must be increasing");
    if (at < SimTime{0}) fail("switches[" + std::to_string(i) + "].at_ms", "must be >= 0");
    prev = at;
  }
  if (s.failures) {
    if (!(s.failures->fraction > 0 && s.failures->fraction <= 1)) fail("failures.fraction", "must lie in (0, 1]");
    if (s.failures->down_at < SimTime{0}) fail("failures.down_at_ms", "must be >= 0");
    if (s.failures->up_at <= s.failures->down_at) fail("failures.up_at_ms", "must be after down_at_ms");
  }
  if (s.pet.beta1 && (*s.pet.beta1 < 0 || *s.pet.beta1 > 1)) fail("pet.beta1", "must lie in [0, 1]");
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

std::vector<std::uint32_t> choose_failed_cables(const sim::Topology& topology, double fraction,
                                                std::uint64_t seed) {
  auto cables = topology.fabric_cables();
  const auto n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(fraction * static_cast<double>(cables.size()))));
  std::mt19937_64 rng(derive_seed(seed, streams::kFailure));
  for (std::size_t i = 0; i < std::min(n, cables.size()); ++i) {
    const auto j = i + uniform_index(rng, cables.size() - i);
    std::swap(cables[i], cables[j]);
  }
  cables.resize(std::min(n, cables.size()));
  std::sort(cables.begin(), cables.end());
  return cables;
}

}  // namespace pet::harness
