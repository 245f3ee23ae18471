// qcopt: command-line front end for the circuit optimizer.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "manifest.hpp"
#include "qcopt/anneal.hpp"
#include "qcopt/circuit_json.hpp"
#include "qcopt/datagen.hpp"
#include "qcopt/error.hpp"
#include "qcopt/ppo.hpp"
#include "qcopt/qaoa.hpp"
#include "qcopt/replay.hpp"

namespace fs = std::filesystem;
using namespace qcopt;
using qcopt::cli::Manifest;
using qcopt::cli::mean_metrics;
using qcopt::cli::metrics;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitVerify = 3;
constexpr int kExitLimit = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;
  std::string manifest;
};

int default_jobs() {
  if (const char* v = std::getenv("QCOPT_JOBS")) {
    try {
      return std::max(1, std::stoi(v));
    } catch (const std::exception&) {
      throw UsageError("QCOPT_JOBS must be an integer");
    }
  }
  return 1;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--out", c.out, "output file or directory");
  sub->add_option("--jobs", c.jobs, "worker threads (default: QCOPT_JOBS or 1)")->check(CLI::PositiveNumber);
  sub->add_option("--manifest", c.manifest, "manifest path (default: next to --out, else stderr)");
}

bool is_circuit_file(const fs::path& p) {
  const std::string name = p.filename().string();
  auto ends = [&](std::string_view s) { return name.size() >= s.size() && name.ends_with(s); };
  return p.extension() == ".json" && !ends(".manifest.json") && !ends(".log.json") && name != "manifest.json";
}

std::vector<fs::path> list_inputs(const std::string& in) {
  if (fs::is_directory(in)) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(in)) {
      if (e.is_regular_file() && is_circuit_file(e.path())) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw UsageError("no circuit files in " + in);
    return out;
  }
  if (!fs::exists(in)) throw UsageError("no such file: " + in);
  return {fs::path(in)};
}

bool batch_mode(const std::string& in) { return fs::is_directory(in); }

fs::path manifest_path(const Common& c, bool out_is_dir) {
  if (!c.manifest.empty()) return c.manifest;
  if (c.out.empty()) return {};
  return out_is_dir ? fs::path(c.out) / "manifest.json" : fs::path(c.out + ".manifest.json");
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw Error(Errc::Io, "cannot write " + p.string());
  os << text;
}

// Writes circuits either to stdout (single, no --out), a file, or a directory.
std::vector<fs::path> emit_circuits(const std::vector<Circuit>& cs, const std::vector<std::string>& names,
                                    const std::string& out, bool dir) {
  std::vector<fs::path> written;
  if (out.empty()) {
    if (cs.size() != 1) throw UsageError("--out is required for more than one circuit");
    std::cout << dump_circuit(cs[0]) << '\n';
    return written;
  }
  if (dir) {
    fs::create_directories(out);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      written.push_back(fs::path(out) / names[i]);
      save_circuit(cs[i], written.back());
    }
  } else {
    save_circuit(cs[0], out);
    written.emplace_back(out);
  }
  return written;
}

std::vector<std::string> names_of(const std::vector<fs::path>& ps) {
  std::vector<std::string> n;
  for (const auto& p : ps) n.push_back(p.filename().string());
  return n;
}

std::string stem_of(const std::string& name) { return fs::path(name).stem().string(); }

nlohmann::json rule_counts(const std::vector<StepRecord>& log) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& s : log) {
    const std::string n(RuleCatalog::standard().rule(s.rule).name());
    j[n] = j.value(n, 0) + 1;
  }
  return j;
}

// ---------------------------------------------------------------- generate

struct GenerateOpts {
  Common c;
  int qubits = 12, gates = 150, count = 1, expand = 0;
  double cnot_prob = GenConfig{}.cnot_probability;
};

int run_generate(const GenerateOpts& o) {
  Manifest m("generate");
  m.config() = {{"qubits", o.qubits}, {"gates", o.gates}, {"count", o.count}, {"expand", o.expand},
                {"cnot_probability", o.cnot_prob}, {"jobs", o.c.jobs}};
  m.add_seed(o.c.seed);
  GenConfig cfg{o.qubits, o.gates, o.c.seed, o.expand, o.cnot_prob};
  const auto n = static_cast<std::size_t>(o.count);
  std::vector<Circuit> raw(n), out(n);
  parallel_for(n, o.c.jobs, [&](std::size_t i) {
    GenConfig g = cfg;
    g.seed = derive_seed(cfg.seed, 2 * i);
    raw[i] = random_circuit(g);
    out[i] = o.expand > 0 ? make_episode(cfg, i) : raw[i];
  });
  m.stages()["generated"] = mean_metrics(raw);
  if (o.expand > 0) m.stages()["expanded"] = mean_metrics(out);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "circuit_%05zu.json", i);
    names.emplace_back(buf);
  }
  const bool dir = !o.c.out.empty() && !(n == 1 && fs::path(o.c.out).extension() == ".json");
  for (const auto& p : emit_circuits(out, names, o.c.out, dir)) m.add_output(p);
  m.write(manifest_path(o.c, dir));
  return 0;
}

// ---------------------------------------------------------------- prune

struct InputOpts {
  Common c;
  std::string input;
};

int run_prune(const InputOpts& o) {
  Manifest m("prune");
  const auto inputs = list_inputs(o.input);
  std::vector<Circuit> before(inputs.size()), after(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    m.add_input(inputs[i]);
    before[i] = load_circuit(inputs[i]);
  }
  parallel_for(inputs.size(), o.c.jobs, [&](std::size_t i) { after[i] = prune(before[i]); });
  m.config() = {{"input", o.input}, {"jobs", o.c.jobs}};
  m.stages()["before"] = mean_metrics(before);
  m.stages()["after"] = mean_metrics(after);
  const bool dir = batch_mode(o.input);
  for (const auto& p : emit_circuits(after, names_of(inputs), o.c.out, dir)) m.add_output(p);
  m.write(manifest_path(o.c, dir));
  return 0;
}

// ---------------------------------------------------------------- expand

struct ExpandOpts {
  InputOpts in;
  int steps = 500;
  std::string log;
};

void write_logs(const std::vector<TransformationLog>& logs, const std::vector<std::string>& names,
                const std::string& where, bool dir, Manifest& m) {
  if (where.empty()) return;
  if (dir) {
    fs::create_directories(where);
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const fs::path p = fs::path(where) / (stem_of(names[i]) + ".log.json");
      save_log(logs[i], p);
      m.add_output(p);
    }
  } else {
    save_log(logs[0], where);
    m.add_output(where);
  }
}

int run_expand(const ExpandOpts& o) {
  Manifest m("expand");
  const auto inputs = list_inputs(o.in.input);
  const std::size_t n = inputs.size();
  std::vector<Circuit> before(n), after(n);
  std::vector<TransformationLog> logs(n);
  std::vector<int> exhausted(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    m.add_input(inputs[i]);
    before[i] = prune(load_circuit(inputs[i]));
  }
  parallel_for(n, o.in.c.jobs, [&](std::size_t i) {
    ExpandResult r = expand(before[i], o.steps, derive_seed(o.in.c.seed, i));
    exhausted[i] = r.exhausted;
    logs[i] = {before[i], std::move(r.log), r.circuit};
    after[i] = std::move(r.circuit);
  });
  m.config() = {{"input", o.in.input}, {"steps", o.steps}, {"jobs", o.in.c.jobs}};
  m.add_seed(o.in.c.seed);
  m.stages()["before"] = mean_metrics(before);
  m.stages()["after"] = mean_metrics(after);
  m.extra()["exhausted"] = exhausted;
  const bool dir = batch_mode(o.in.input);
  for (const auto& p : emit_circuits(after, names_of(inputs), o.in.c.out, dir)) m.add_output(p);
  write_logs(logs, names_of(inputs), o.log, dir, m);
  m.write(manifest_path(o.in.c, dir));
  for (std::size_t i = 0; i < n; ++i) {
    if (exhausted[i]) std::cerr << inputs[i].string() << ": NoSoftTransformationAvailable after " << logs[i].steps.size() << " steps\n";
  }
  return 0;
}

// ---------------------------------------------------------------- anneal

struct AnnealOpts {
  InputOpts in;
  int steps = 20000;
  double t_start = 1.0, t_end = 0.01;
  bool tune = false;
  int pilot_steps = 2000;
  std::string trace, log;
};

int run_anneal(const AnnealOpts& o) {
  Manifest m("anneal");
  const auto inputs = list_inputs(o.in.input);
  const std::size_t n = inputs.size();
  std::vector<Circuit> before(n), after(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.add_input(inputs[i]);
    before[i] = prune(load_circuit(inputs[i]));
  }
  AnnealConfig cfg;
  cfg.steps = o.steps;
  cfg.t_start = o.t_start;
  cfg.t_end = o.t_end;
  cfg.seed = o.in.c.seed;
  if (o.tune) {
    TuneConfig tc;
    tc.pilot_steps = o.pilot_steps;
    const TuneResult t = tune_acceptance(cfg, before, tc);
    cfg = t.config;
    m.extra()["tuning"] = {{"t_start", cfg.t_start}, {"t_end", cfg.t_end}, {"pilot_acceptance", t.acceptance},
                           {"iterations", t.iterations}};
  }
  std::vector<AnnealResult> res(n);
  parallel_for(n, o.in.c.jobs, [&](std::size_t i) {
    AnnealConfig c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    c.record_trace = !o.trace.empty();
    res[i] = anneal(before[i], c);
    after[i] = res[i].best;
  });
  m.config() = {{"input", o.in.input}, {"steps", cfg.steps}, {"t_start", cfg.t_start}, {"t_end", cfg.t_end},
                {"tune", o.tune}, {"jobs", o.in.c.jobs}};
  m.add_seed(o.in.c.seed);
  m.stages()["before"] = mean_metrics(before);
  m.stages()["after"] = mean_metrics(after);
  double acc = 0;
  for (const auto& r : res) acc += r.acceptance_fraction();
  m.extra()["acceptance"] = acc / static_cast<double>(n);

  const bool dir = batch_mode(o.in.input);
  for (const auto& p : emit_circuits(after, names_of(inputs), o.in.c.out, dir)) m.add_output(p);
  std::vector<TransformationLog> logs;
  for (std::size_t i = 0; i < n; ++i) logs.push_back({before[i], res[i].log, res[i].best});
  write_logs(logs, names_of(inputs), o.log, dir, m);
  if (!o.trace.empty()) {
    auto write_trace = [&](const AnnealResult& r, const fs::path& p) {
      std::ofstream os(p);
      if (!os) throw Error(Errc::Io, "cannot write " + p.string());
      os << "step,temperature,q,d,n,accepted\n";
      os.precision(17);
      for (const auto& row : r.trace) {
        os << row.step << ',' << row.temperature << ',' << row.q << ',' << row.depth << ',' << row.gate_count << ','
           << (row.accepted ? 1 : 0) << '\n';
      }
      m.add_output(p);
    };
    if (dir) {
      fs::create_directories(o.trace);
      for (std::size_t i = 0; i < n; ++i) write_trace(res[i], fs::path(o.trace) / (stem_of(inputs[i].filename().string()) + ".trace.csv"));
    } else {
      write_trace(res[0], o.trace);
    }
  }
  m.write(manifest_path(o.in.c, dir));
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainOpts {
  Common c;
  int qubits = 4, gates = 20, expand = 30;
  EpisodeSettings env{50, 0, {}};
  TrainConfig tc;
  NetConfig net;
  std::string curve, init;
};

int run_train(const TrainOpts& o) {
  if (o.c.out.empty()) throw UsageError("train needs --out for the parameter file");
  Manifest m("train");
  TrainConfig tc = o.tc;
  tc.seed = o.c.seed;
  tc.jobs = o.c.jobs;
  PolicyValueNet net = o.init.empty() ? PolicyValueNet(o.net, derive_seed(o.c.seed, 0xC0FFEE)) : load_net(o.init);
  if (!o.init.empty()) m.add_input(o.init);
  const GenConfig gen{o.qubits, o.gates, derive_seed(o.c.seed, 1), o.expand};
  std::ofstream curve;
  if (!o.curve.empty()) {
    curve.open(o.curve);
    if (!curve) throw Error(Errc::Io, "cannot write " + o.curve);
    curve << "epoch,mean_d,mean_n,mean_q,mean_return\n";
    curve.precision(10);
  }
  const TrainResult r = train(net, [&](std::uint64_t i) { return make_episode(gen, i); }, o.env, tc, [&](const EpochStats& s) {
    if (curve.is_open()) curve << s.epoch << ',' << s.mean_d << ',' << s.mean_n << ',' << s.mean_q << ',' << s.mean_return << '\n' << std::flush;
  });
  curve.close();
  save_net(net, o.c.out);
  const NetConfig& nc = net.config();
  m.config() = {{"qubits", o.qubits}, {"gates", o.gates}, {"expand", o.expand}, {"episode_length", o.env.episode_length},
                {"capacity", o.env.capacity}, {"epochs", tc.epochs}, {"episodes_per_epoch", tc.episodes_per_epoch},
                {"ppo_epochs", tc.ppo_epochs}, {"minibatches", tc.minibatches}, {"learning_rate", tc.learning_rate}, {"gamma", tc.gamma},
                {"value_coef", tc.value_coef}, {"clip", tc.clip}, {"entropy_coef", tc.entropy_coef},
                {"hidden", nc.hidden}, {"layers", nc.layers}, {"kernel", nc.kernel}, {"jobs", tc.jobs}};
  m.add_seed(o.c.seed);
  if (!r.curve.empty()) {
    const auto& a = r.curve.front();
    const auto& b = r.curve.back();
    m.stages()["first_epoch"] = {{"d", a.mean_d}, {"n", a.mean_n}, {"q", a.mean_q}, {"return", a.mean_return}};
    m.stages()["last_epoch"] = {{"d", b.mean_d}, {"n", b.mean_n}, {"q", b.mean_q}, {"return", b.mean_return}};
  }
  m.add_output(o.c.out);
  if (!o.curve.empty()) m.add_output(o.curve);
  m.write(manifest_path(o.c, false));
  return 0;
}

// ---------------------------------------------------------------- optimize

struct OptimizeOpts {
  InputOpts in;
  std::string net, log;
  int episode_length = 250, attempts = 1, capacity = 0;
  bool greedy = false;
};

int run_optimize(const OptimizeOpts& o) {
  Manifest m("optimize");
  const PolicyValueNet net = load_net(o.net);
  m.add_input(o.net);
  const auto inputs = list_inputs(o.in.input);
  const std::size_t n = inputs.size();
  std::vector<Circuit> before(n), after(n);
  std::vector<OptimizeResult> res(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.add_input(inputs[i]);
    before[i] = load_circuit(inputs[i]);
  }
  parallel_for(n, o.in.c.jobs, [&](std::size_t i) {
    res[i] = optimize(net, before[i], o.episode_length, o.attempts, o.greedy, derive_seed(o.in.c.seed, i), o.capacity);
    after[i] = res[i].best;
  });
  std::vector<Circuit> pruned;
  for (const auto& r : res) pruned.push_back(r.start);
  m.config() = {{"input", o.in.input}, {"episode_length", o.episode_length}, {"attempts", o.attempts},
                {"greedy", o.greedy}, {"capacity", o.capacity}, {"jobs", o.in.c.jobs}};
  m.add_seed(o.in.c.seed);
  m.stages()["input"] = mean_metrics(before);
  m.stages()["pruned"] = mean_metrics(pruned);
  m.stages()["optimized"] = mean_metrics(after);
  const bool dir = batch_mode(o.in.input);
  for (const auto& p : emit_circuits(after, names_of(inputs), o.in.c.out, dir)) m.add_output(p);
  std::vector<TransformationLog> logs;
  for (const auto& r : res) logs.push_back({r.start, r.log, r.best});
  write_logs(logs, names_of(inputs), o.log, dir, m);
  m.write(manifest_path(o.in.c, dir));
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyOpts {
  Common c;
  std::string input;
  int cap = kDefaultUnitaryCap;
};

int run_verify(const VerifyOpts& o) {
  Manifest m("verify");
  std::vector<fs::path> logs;
  if (fs::is_directory(o.input)) {
    for (const auto& e : fs::directory_iterator(o.input)) {
      if (e.is_regular_file() && e.path().filename().string().ends_with(".log.json")) logs.push_back(e.path());
    }
    std::sort(logs.begin(), logs.end());
    if (logs.empty()) throw UsageError("no *.log.json files in " + o.input);
  } else {
    if (!fs::exists(o.input)) throw UsageError("no such file: " + o.input);
    logs.emplace_back(o.input);
  }
  nlohmann::json report = nlohmann::json::array();
  std::size_t violations = 0;
  bool ok = true;
  for (const auto& p : logs) {
    m.add_input(p);
    const ReplayReport r = replay_log(load_log(p), RuleCatalog::standard(), o.cap);
    violations += r.violations;
    ok &= r.ok();
    const char* full = r.full == FullCheck::Pass ? "pass" : r.full == FullCheck::Fail ? "fail" : "skipped";
    nlohmann::json e{{"log", p.string()}, {"steps", r.steps}, {"local_checks", r.local_checks},
                     {"violations", r.violations}, {"full_unitary", full}, {"messages", r.messages}};
    if (r.final_matches) e["final_matches"] = *r.final_matches;
    report.push_back(std::move(e));
  }
  const nlohmann::json summary{{"logs", logs.size()}, {"violations", violations}, {"ok", ok}, {"results", report}};
  if (o.c.out.empty()) {
    std::cout << summary.dump(2) << '\n';
  } else {
    write_text(o.c.out, summary.dump(2) + "\n");
    m.add_output(o.c.out);
  }
  m.config() = {{"input", o.input}, {"unitary_cap", o.cap}};
  m.stages()["verify"] = {{"violations", violations}, {"ok", ok}};
  m.write(manifest_path(o.c, false));
  return ok ? 0 : kExitVerify;
}

// ---------------------------------------------------------------- compile-qaoa

struct QaoaOpts {
  Common c;
  std::string graph;
  int nodes = -1, qubits = 0, cycles = 0;
  std::vector<double> gamma, beta;
  bool special = false;
};

int run_compile_qaoa(const QaoaOpts& o) {
  Manifest m("compile-qaoa");
  const Graph g = load_edge_list(o.graph, o.nodes);
  m.add_input(o.graph);
  QaoaParams p{o.gamma, o.beta, o.special};
  if (p.gamma.empty() && p.beta.empty()) {
    if (o.cycles < 1) throw UsageError("give --gamma/--beta or --cycles");
    std::mt19937_64 rng(o.c.seed);
    std::uniform_real_distribution<double> ang(0.05, std::numbers::pi / 2 - 0.05);
    for (int c = 0; c < o.cycles; ++c) {
      p.gamma.push_back(ang(rng));
      p.beta.push_back(ang(rng));
    }
    m.add_seed(o.c.seed);
  } else if (p.gamma.size() != p.beta.size()) {
    throw UsageError("--gamma and --beta need the same number of values");
  }
  const QaoaCircuit qc = compile_maxcut(g, p, o.qubits);
  for (const auto& w : qc.warnings) std::cerr << "warning: " << w << '\n';
  m.config() = {{"graph", o.graph}, {"nodes", g.num_nodes}, {"edges", g.edges.size()}, {"qubits", qc.circuit.num_qubits()},
                {"gamma", p.gamma}, {"beta", p.beta}, {"special_angles", p.special_angles}};
  m.stages()["compiled"] = metrics(qc.circuit);
  m.extra()["qubit_of_node"] = qc.qubit_of_node;
  m.extra()["warnings"] = qc.warnings;
  for (const auto& out : emit_circuits({qc.circuit}, {"qaoa.json"}, o.c.out, false)) m.add_output(out);
  m.write(manifest_path(o.c, false));
  return 0;
}

// ---------------------------------------------------------------- stats

int run_stats(const InputOpts& o) {
  const auto inputs = list_inputs(o.input);
  std::vector<double> d, n, q;
  for (const auto& p : inputs) {
    const Circuit c = load_circuit(p);
    d.push_back(c.depth());
    n.push_back(static_cast<double>(c.gate_count()));
    q.push_back(quality(c));
  }
  auto summary = [](const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
    return nlohmann::json{{"mean", mean}, {"stderr", se}};
  };
  const nlohmann::json j{{"count", inputs.size()}, {"d", summary(d)}, {"n", summary(n)}, {"q", summary(q)}};
  if (o.c.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(o.c.out, j.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------- render

std::string label(const Gate& g, int qubit) {
  char buf[48];
  const double pi = std::numbers::pi;
  if (const auto* z = std::get_if<ZRot>(&g)) {
    std::snprintf(buf, sizeof buf, "Z%.2f", z->theta / pi);
  } else if (const auto* x = std::get_if<PhasedX>(&g)) {
    std::snprintf(buf, sizeof buf, "X%.2f@%.2f", x->angle / pi, x->axis_phase / pi);
  } else {
    const auto& c = std::get<CNot>(g);
    std::snprintf(buf, sizeof buf, c.control == qubit ? "C>%d" : "T<%d", c.control == qubit ? c.target : c.control);
  }
  return buf;
}

std::string render(const Circuit& c) {
  std::vector<std::vector<std::string>> cells(c.num_qubits(), std::vector<std::string>(c.depth(), "-"));
  std::vector<std::size_t> width(c.depth(), 1);
  for (GateId id = 0; id < c.gate_count(); ++id) {
    for (int q : qubits_of(c.gate(id))) {
      cells[q][c.moment(id)] = label(c.gate(id), q);
      width[c.moment(id)] = std::max(width[c.moment(id)], cells[q][c.moment(id)].size());
    }
  }
  std::ostringstream os;
  for (int q = 0; q < c.num_qubits(); ++q) {
    os << 'q' << q << (q < 10 ? "  " : " ") << ':';
    for (int t = 0; t < c.depth(); ++t) {
      std::string s = cells[q][t];
      s.resize(width[t], '-');
      os << '-' << s << '-';
    }
    os << '\n';
  }
  os << "d=" << c.depth() << " n=" << c.gate_count() << " q=" << quality(c) << '\n';
  return os.str();
}

int run_render(const InputOpts& o) {
  std::ostringstream os;
  for (const auto& p : list_inputs(o.input)) {
    if (batch_mode(o.input)) os << "# " << p.filename().string() << '\n';
    os << render(load_circuit(p));
  }
  if (o.c.out.empty()) {
    std::cout << os.str();
  } else {
    write_text(o.c.out, os.str());
  }
  return 0;
}

int exit_code_for(Errc e) {
  switch (e) {
    case Errc::CapacityExceeded:
    case Errc::QubitCapExceeded:
    case Errc::TooManyNodes:
      return kExitLimit;
    case Errc::InvalidCircuit:
    case Errc::InvalidGraph:
    case Errc::Parse:
    case Errc::Io:
      return kExitUsage;
    default:
      return kExitOther;
  }
}

void print_error(std::string_view code, std::string_view message) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum circuit optimizer: rule-based rewriting driven by annealing or a learned policy"};
  app.require_subcommand(1);
  int jobs = 1;
  try {
    jobs = default_jobs();
  } catch (const UsageError& e) {
    print_error("Usage", e.what());
    return kExitUsage;
  }

  GenerateOpts gen;
  gen.c.jobs = jobs;
  auto* s_gen = app.add_subcommand("generate", "random circuits (optionally pruned and expanded)");
  add_common(s_gen, gen.c);
  s_gen->add_option("--qubits", gen.qubits)->check(CLI::Range(2, 1 << 16));
  s_gen->add_option("--gates", gen.gates, "logical gates per circuit")->check(CLI::NonNegativeNumber);
  s_gen->add_option("--count", gen.count)->check(CLI::NonNegativeNumber);
  s_gen->add_option("--expand", gen.expand, "random expansion steps after pruning; 0 keeps the raw circuit")
      ->check(CLI::NonNegativeNumber);
  s_gen->add_option("--cnot-prob", gen.cnot_prob)->check(CLI::Range(0.0, 1.0));

  InputOpts pr;
  pr.c.jobs = jobs;
  auto* s_prune = app.add_subcommand("prune", "apply hard rules to a fixpoint");
  add_common(s_prune, pr.c);
  s_prune->add_option("input", pr.input, "circuit file or directory")->required();

  ExpandOpts ex;
  ex.in.c.jobs = jobs;
  auto* s_expand = app.add_subcommand("expand", "random soft transformations, each followed by prune");
  add_common(s_expand, ex.in.c);
  s_expand->add_option("input", ex.in.input)->required();
  s_expand->add_option("--steps", ex.steps)->check(CLI::NonNegativeNumber);
  s_expand->add_option("--log", ex.log, "transformation log file (directory for batch input)");

  AnnealOpts an;
  an.in.c.jobs = jobs;
  auto* s_anneal = app.add_subcommand("anneal", "simulated annealing over soft transformations");
  add_common(s_anneal, an.in.c);
  s_anneal->add_option("input", an.in.input)->required();
  s_anneal->add_option("--steps", an.steps)->check(CLI::PositiveNumber);
  s_anneal->add_option("--t-start", an.t_start)->check(CLI::PositiveNumber);
  s_anneal->add_option("--t-end", an.t_end)->check(CLI::PositiveNumber);
  s_anneal->add_flag("--tune", an.tune, "rescale temperatures for 10-25% acceptance on the inputs (needs >= 10)");
  s_anneal->add_option("--pilot-steps", an.pilot_steps)->check(CLI::PositiveNumber);
  s_anneal->add_option("--trace", an.trace, "CSV trace file (directory for batch input)");
  s_anneal->add_option("--log", an.log, "log of accepted moves up to the best state");

  TrainOpts tr;
  tr.c.jobs = jobs;
  auto* s_train = app.add_subcommand("train", "PPO training on freshly generated episodes");
  add_common(s_train, tr.c);
  s_train->add_option("--qubits", tr.qubits)->check(CLI::Range(2, 1 << 16));
  s_train->add_option("--gates", tr.gates)->check(CLI::NonNegativeNumber);
  s_train->add_option("--expand", tr.expand)->check(CLI::NonNegativeNumber);
  s_train->add_option("--episode-length", tr.env.episode_length)->check(CLI::PositiveNumber);
  s_train->add_option("--capacity", tr.env.capacity, "moment capacity; 0 = twice the start depth");
  s_train->add_option("--epochs", tr.tc.epochs)->check(CLI::NonNegativeNumber);
  s_train->add_option("--episodes", tr.tc.episodes_per_epoch, "episodes per epoch")->check(CLI::PositiveNumber);
  s_train->add_option("--ppo-epochs", tr.tc.ppo_epochs)->check(CLI::PositiveNumber);
  s_train->add_option("--minibatches", tr.tc.minibatches, "episode groups per PPO pass")->check(CLI::PositiveNumber);
  s_train->add_option("--lr", tr.tc.learning_rate)->check(CLI::PositiveNumber);
  s_train->add_option("--gamma", tr.tc.gamma)->check(CLI::Range(0.0, 1.0));
  s_train->add_option("--value-coef", tr.tc.value_coef)->check(CLI::NonNegativeNumber);
  s_train->add_option("--clip", tr.tc.clip)->check(CLI::PositiveNumber);
  s_train->add_option("--entropy", tr.tc.entropy_coef)->check(CLI::NonNegativeNumber);
  s_train->add_option("--hidden", tr.net.hidden)->check(CLI::PositiveNumber);
  s_train->add_option("--layers", tr.net.layers)->check(CLI::PositiveNumber);
  s_train->add_option("--kernel", tr.net.kernel)->check(CLI::PositiveNumber);
  s_train->add_option("--curve", tr.curve, "learning curve CSV");
  s_train->add_option("--init", tr.init, "start from this parameter file");

  OptimizeOpts op;
  op.in.c.jobs = jobs;
  auto* s_opt = app.add_subcommand("optimize", "best state over policy rollouts");
  add_common(s_opt, op.in.c);
  s_opt->add_option("input", op.in.input)->required();
  s_opt->add_option("--net", op.net, "parameter file")->required();
  s_opt->add_option("--episode-length", op.episode_length)->check(CLI::PositiveNumber);
  s_opt->add_option("--attempts", op.attempts)->check(CLI::PositiveNumber);
  s_opt->add_option("--capacity", op.capacity);
  s_opt->add_flag("--greedy", op.greedy, "first attempt takes argmax actions");
  s_opt->add_option("--log", op.log);

  VerifyOpts ve;
  ve.c.jobs = jobs;
  auto* s_verify = app.add_subcommand("verify", "replay transformation logs and check every step");
  add_common(s_verify, ve.c);
  s_verify->add_option("input", ve.input, "log file or directory of *.log.json")->required();
  s_verify->add_option("--unitary-cap", ve.cap, "largest qubit count for the full-unitary check");

  QaoaOpts qa;
  qa.c.jobs = jobs;
  auto* s_qaoa = app.add_subcommand("compile-qaoa", "MaxCut QAOA circuit for an edge list");
  add_common(s_qaoa, qa.c);
  s_qaoa->add_option("--graph", qa.graph, "edge list, one \"u v\" per line")->required();
  s_qaoa->add_option("--nodes", qa.nodes, "node count (default: largest index + 1)");
  s_qaoa->add_option("--qubits", qa.qubits, "chain length (default: node count)");
  s_qaoa->add_option("--gamma", qa.gamma)->delimiter(',');
  s_qaoa->add_option("--beta", qa.beta)->delimiter(',');
  s_qaoa->add_option("--cycles", qa.cycles, "random angles for this many cycles when none are given");
  s_qaoa->add_flag("--special-angles", qa.special, "angles near multiples of pi/2 are intended");

  InputOpts st;
  st.c.jobs = jobs;
  auto* s_stats = app.add_subcommand("stats", "mean and standard error of d, n, q");
  add_common(s_stats, st.c);
  s_stats->add_option("input", st.input, "directory of circuits")->required();

  InputOpts re;
  re.c.jobs = jobs;
  auto* s_render = app.add_subcommand("render", "text diagram, one line per qubit");
  add_common(s_render, re.c);
  s_render->add_option("input", re.input)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*s_gen) return run_generate(gen);
    if (*s_prune) return run_prune(pr);
    if (*s_expand) return run_expand(ex);
    if (*s_anneal) return run_anneal(an);
    if (*s_train) return run_train(tr);
    if (*s_opt) return run_optimize(op);
    if (*s_verify) return run_verify(ve);
    if (*s_qaoa) return run_compile_qaoa(qa);
    if (*s_stats) return run_stats(st);
    if (*s_render) return run_render(re);
  } catch (const UsageError& e) {
    print_error("Usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    print_error("Io", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return kExitOther;
  }
  return kExitOther;
}
