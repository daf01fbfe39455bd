// psynth: command-line front end.
//
// Exit codes: 0 success, 1 specification violated (check), 2 usage or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "psynth/benchmarks.hpp"
#include "psynth/dataset.hpp"
#include "psynth/extract.hpp"
#include "psynth/fsc.hpp"
#include "psynth/mc.hpp"
#include "psynth/model_io.hpp"
#include "psynth/policy.hpp"
#include "psynth/refine.hpp"
#include "psynth/spec.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace psynth;

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("PSYNTH_THREADS")) return std::max(1, std::atoi(env));
  return 1;
}

struct Manifest {
  json doc;
  explicit Manifest(std::string command, int argc, char** argv) {
    doc["tool"] = "psynth";
    doc["version"] = PSYNTH_VERSION;
    doc["command"] = std::move(command);
    std::vector<std::string> args(argv, argv + argc);
    doc["argv"] = args;
    doc["started"] = timestamp();
  }
  void write(const fs::path& path) {
    doc["finished"] = timestamp();
    if (path.empty()) return;
    write_file(path, doc.dump(2) + "\n");
  }
};

fs::path manifest_for(const std::string& explicit_path, const fs::path& output) {
  if (!explicit_path.empty()) return explicit_path;
  if (output.empty()) return {};
  return fs::path(output.string() + ".manifest.json");
}

// Working model for a memory configuration given on the command line.
struct MemoryOptions {
  std::size_t k = 1;
  std::string kind = "observation-repeat";
  std::string set_label, reset_label;

  void add(CLI::App* app) {
    app->add_option("--fsc-k", k, "memory nodes of the controller")->check(CLI::PositiveNumber);
    app->add_option("--memory", kind, "memory update: observation-repeat | spec-driven")
        ->check(CLI::IsMember({"observation-repeat", "repeat", "spec-driven", "spec"}));
    app->add_option("--memory-set", set_label, "spec-driven: comma-separated labels whose observations set node 1");
    app->add_option("--memory-reset", reset_label, "spec-driven: comma-separated labels whose observations reset to node 0");
  }

  SynthesisConfig config(const Pomdp& m) const {
    SynthesisConfig cfg;
    cfg.memory_nodes = k;
    cfg.memory_kind = parse_memory_kind(kind);
    if (!set_label.empty()) cfg.spec_classes = spec_driven_classes(m, set_label, reset_label);
    return cfg;
  }

  json to_json() const { return {{"k", k}, {"kind", kind}, {"set", set_label}, {"reset", reset_label}}; }
};

int run_bench(const std::string& family, int size, double slip, int rocks, const std::string& out,
              const std::string& manifest_path, Manifest& man) {
  GridConfig cfg;
  cfg.family = parse_family(family);
  cfg.size = size;
  cfg.slip = slip;
  cfg.rocks = rocks;
  const Pomdp m = generate_benchmark(cfg);
  const std::string text = serialize_model(m);
  if (out.empty() || out == "-") std::cout << text;
  else write_file(out, text);
  std::cerr << family << "(" << size << "): " << m.num_states() << " states, " << m.num_observations
            << " observations, " << m.num_actions() << " actions, " << m.num_transitions() << " transitions\n";
  man.doc["config"] = {{"family", family}, {"size", size}, {"slip", slip}, {"rocks", rocks}};
  man.doc["model_hash"] = model_hash(m);
  man.write(manifest_for(manifest_path, out == "-" ? "" : out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterexample-guided strategy synthesis for POMDPs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PSYNTH_VERSION);
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "where to write the run manifest");
  std::size_t threads = default_threads();
  app.add_option("--threads", threads, "parallel sub-solves per iteration (default $PSYNTH_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  // bench gen
  auto* bench = app.add_subcommand("bench", "benchmark models");
  bench->require_subcommand(1);
  auto* gen = bench->add_subcommand("gen", "generate a benchmark model");
  std::string family, out;
  int size = 3, rocks = 0;
  double slip = 0.1;
  gen->add_option("--family", family, "navigation | delivery | slippery | maze | grid | rocksample")->required();
  gen->add_option("--size", size, "grid size c (rocksample: n)")->required();
  gen->add_option("--slip", slip, "slip probability (slippery)");
  gen->add_option("--rocks", rocks, "rock count (rocksample)");
  gen->add_option("-o,--out", out, "output file (default stdout)");

  // check
  auto* chk = app.add_subcommand("check", "verify a strategy");
  std::string model_path, spec_text, strategy_path, fsc_path;
  bool mdp_opt = false;
  MemoryOptions chk_mem;
  chk->add_option("--model", model_path, "model file")->required();
  chk->add_option("--spec", spec_text, "specification")->required();
  auto* chk_src = chk->add_option_group("strategy source");
  chk_src->add_option("--strategy", strategy_path, "strategy file (product strategy with --fsc-k)");
  chk_src->add_option("--fsc", fsc_path, "finite-state controller file");
  chk_src->add_flag("--mdp-optimal", mdp_opt, "optimal value of the underlying MDP");
  chk_src->require_option(1);
  chk_mem.add(chk);

  // sample
  auto* smp = app.add_subcommand("sample", "sample training sequences");
  std::string donor_path;
  std::size_t count = 5000, max_len = 20;
  std::uint64_t seed = 1;
  MemoryOptions smp_mem;
  smp->add_option("--model", model_path, "model file")->required();
  smp->add_option("--spec", spec_text, "specification (selects the sampling strategy)")->required();
  smp->add_option("--strategy", strategy_path, "sample under this strategy instead of the MDP optimum");
  smp->add_option("--donor", donor_path, "sample on a smaller model with the same alphabets");
  smp->add_option("--count", count, "number of sequences");
  smp->add_option("--max-len", max_len, "maximum sequence length");
  smp->add_option("--seed", seed, "random seed");
  smp->add_option("-o,--out", out, "dataset file")->required();
  smp_mem.add(smp);

  // train
  auto* trn = app.add_subcommand("train", "train a recurrent policy");
  std::string data_path, policy_path, init_path;
  TrainConfig tcfg;
  trn->add_option("--data", data_path, "dataset file")->required();
  trn->add_option("--init", init_path, "continue from this checkpoint");
  trn->add_option("--hidden", tcfg.hidden, "hidden width")->check(CLI::PositiveNumber);
  trn->add_option("--epochs", tcfg.epochs, "epochs");
  trn->add_option("--lr", tcfg.learning_rate, "learning rate")->check(CLI::PositiveNumber);
  trn->add_option("--batch", tcfg.batch_size, "batch size")->check(CLI::PositiveNumber);
  trn->add_option("--clip", tcfg.clip_norm, "gradient norm clip")->check(CLI::PositiveNumber);
  trn->add_option("--seed", tcfg.seed, "random seed");
  trn->add_option("--max-len", tcfg.max_len, "truncate sequences (0 = no)");
  std::size_t train_k = 1;
  trn->add_option("--fsc-k", train_k, "memory nodes of a product alphabet (factored input encoding)")
      ->check(CLI::PositiveNumber);
  trn->add_option("-o,--out", out, "checkpoint file")->required();

  // extract
  auto* ext = app.add_subcommand("extract", "extract a strategy from a policy");
  std::size_t predictions = 1;
  std::string fsc_out;
  MemoryOptions ext_mem;
  ext->add_option("--model", model_path, "model file")->required();
  ext->add_option("--policy", policy_path, "checkpoint file")->required();
  ext->add_option("--spec", spec_text, "specification (for spec-driven memory)");
  ext->add_option("--predictions", predictions, "repeat each query n times")->check(CLI::PositiveNumber);
  ext->add_option("-o,--out", out, "strategy file")->required();
  ext->add_option("--fsc-out", fsc_out, "also write the controller (with --fsc-k)");
  ext_mem.add(ext);

  // synth
  auto* syn = app.add_subcommand("synth", "counterexample-guided synthesis");
  SynthesisConfig scfg;
  MemoryOptions syn_mem;
  std::string log_path, out_dir;
  std::size_t epochs = scfg.train.epochs;
  syn->add_option("--model", model_path, "model file")->required();
  syn->add_option("--spec", spec_text, "specification")->required();
  syn->add_option("--iters", scfg.max_iterations, "maximum iterations")->check(CLI::PositiveNumber);
  syn->add_option("--seed", scfg.seed, "random seed");
  syn->add_option("--epsilon", scfg.progress_epsilon, "stop when the value changes less than this");
  syn->add_flag("--early-stop", scfg.early_stop, "stop once the specification holds");
  syn->add_option("--relative", scfg.relative_fraction, "relative criticality fraction");
  syn->add_flag("--relative-criticality", "use the relative criticality threshold for threshold queries too");
  bool unverified = false;
  syn->add_flag("--unverified-improvements", unverified, "apply every LP row without re-verification");
  syn->add_option("--samples", scfg.sample_count, "initial sequences");
  syn->add_option("--resamples", scfg.resample_count, "sequences per refinement");
  syn->add_option("--max-len", scfg.max_len, "maximum sequence length");
  syn->add_option("--epochs", epochs, "training epochs per iteration");
  syn->add_option("--hidden", scfg.train.hidden, "hidden width")->check(CLI::PositiveNumber);
  syn->add_option("--lr", scfg.train.learning_rate, "learning rate")->check(CLI::PositiveNumber);
  syn->add_option("--batch", scfg.train.batch_size, "batch size")->check(CLI::PositiveNumber);
  syn->add_option("--log", log_path, "per-iteration CSV");
  syn->add_option("--out-dir", out_dir, "directory for per-iteration strategies and the result");
  syn_mem.add(syn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*bench) {
      Manifest man("bench gen", argc, argv);
      return run_bench(family, size, slip, rocks, out, manifest_path, man);
    }

    if (*chk) {
      Manifest man("check", argc, argv);
      const Pomdp m = load_model(model_path);
      const Specification spec = parse_spec(spec_text);
      man.doc["model_hash"] = model_hash(m);
      man.doc["spec"] = to_string(spec);
      man.doc["config"] = {{"memory", chk_mem.to_json()}};
      VerificationResult r;
      std::string what;
      if (mdp_opt) {
        const MdpSolution sol = mdp_optimal(compose(m, build_automaton(spec)), spec);
        r.value = sol.value;
        r.values = sol.values;
        r.satisfied = spec.satisfied_by(sol.value);
        what = "mdp-optimal";
      } else if (!fsc_path.empty()) {
        const Fsc f = parse_fsc(read_file(fsc_path), m.actions, m.num_observations);
        r = check_fsc(m, f, spec);
        what = fsc_path;
      } else {
        SynthesisConfig cfg = chk_mem.config(m);
        const Pomdp work = working_model(m, spec, cfg);
        const ObservationStrategy s = parse_strategy(read_file(strategy_path), work.actions);
        if (s.memory_nodes != cfg.memory_nodes)
          throw ModelError("strategy has memory=" + std::to_string(s.memory_nodes) + " but --fsc-k is " +
                           std::to_string(cfg.memory_nodes));
        r = check(compose(work, build_automaton(spec)), s, spec);
        what = strategy_path;
      }
      std::cout << fmt(r.value) << "\n";
      std::cerr << to_string(spec) << " under " << what << ": " << fmt(r.value)
                << (spec.optimizes() ? "" : r.satisfied ? " (satisfied)" : " (violated)") << ", " << r.states
                << " chain states, " << r.transitions << " transitions, " << r.seconds << " s\n";
      man.doc["result"] = {{"value", r.value}, {"satisfied", r.satisfied}};
      man.write(manifest_path);
      return spec.optimizes() || r.satisfied ? 0 : 1;
    }

    if (*smp) {
      Manifest man("sample", argc, argv);
      const Pomdp m = load_model(model_path);
      const Specification spec = parse_spec(spec_text);
      Pomdp source = m;
      if (!donor_path.empty()) {
        source = load_model(donor_path);
        if (source.num_observations != m.num_observations || source.actions != m.actions)
          throw ModelError("donor model alphabets differ from the target model");
      }
      SynthesisConfig cfg = smp_mem.config(source);
      const ComposedModel cm = compose(working_model(source, spec, cfg), build_automaton(spec));
      MdpStrategy sigma;
      if (strategy_path.empty()) {
        sigma = mdp_optimal(cm, spec).strategy;
      } else {
        sigma = lift(cm.model, parse_strategy(read_file(strategy_path), cm.model.actions));
      }
      SampleOptions opt;
      opt.count = count;
      opt.max_len = max_len;
      opt.seed = seed;
      if (cm.objective.kind != Objective::Kind::Recurrence) {
        opt.stop.assign(cm.model.num_states(), 0);
        for (StateId s = 0; s < cm.model.num_states(); ++s)
          opt.stop[s] = cm.objective.goal[s] || (!cm.objective.avoid.empty() && cm.objective.avoid[s]);
      }
      TrajectoryDataset d = to_observation_sequences(sample_trajectories(cm.model, sigma, opt), cm.model);
      d.seed = seed;
      d.max_len = max_len;
      d.model_hash = model_hash(source);
      write_file(out, serialize_dataset(d));
      std::cerr << d.sequences.size() << " sequences, " << d.steps() << " labelled steps\n";
      man.doc["model_hash"] = d.model_hash;
      man.doc["spec"] = to_string(spec);
      man.doc["seeds"] = {seed};
      man.doc["config"] = {{"count", count}, {"max_len", max_len}, {"memory", smp_mem.to_json()}, {"donor", donor_path}};
      man.write(manifest_for(manifest_path, out));
      return 0;
    }

    if (*trn) {
      Manifest man("train", argc, argv);
      const TrajectoryDataset d = parse_dataset(read_file(data_path));
      RecurrentPolicy p = init_path.empty()
                              ? RecurrentPolicy(d.num_observations, d.num_actions, tcfg.hidden, tcfg.seed, train_k)
                              : RecurrentPolicy::parse(read_file(init_path));
      const TrainReport rep = train(p, d, tcfg);
      write_file(out, p.serialize());
      for (std::size_t e = 0; e < rep.epoch_loss.size(); ++e)
        std::cerr << "epoch " << e + 1 << " loss " << rep.epoch_loss[e] << "\n";
      std::cerr << "loss " << rep.initial_loss << " -> " << rep.final_loss << (rep.flagged ? " (increased)" : "")
                << "\n";
      man.doc["seeds"] = {tcfg.seed};
      man.doc["config"] = {{"hidden", tcfg.hidden}, {"epochs", tcfg.epochs}, {"lr", tcfg.learning_rate},
                           {"batch", tcfg.batch_size}, {"clip", tcfg.clip_norm}, {"max_len", tcfg.max_len}, {"memory", train_k},
                           {"data", data_path}, {"init", init_path}};
      man.doc["result"] = {{"initial_loss", rep.initial_loss}, {"final_loss", rep.final_loss}};
      man.write(manifest_for(manifest_path, out));
      return 0;
    }

    if (*ext) {
      Manifest man("extract", argc, argv);
      const Pomdp m = load_model(model_path);
      SynthesisConfig cfg = ext_mem.config(m);
      const Specification spec = spec_text.empty() ? parse_spec("Pmax [ F " + m.labels.begin()->first + " ]")
                                                   : parse_spec(spec_text);
      MemoryUpdate delta;
      const Pomdp work = working_model(m, spec, cfg, &delta);
      const RecurrentPolicy p = RecurrentPolicy::parse(read_file(policy_path));
      if (p.memory_nodes() != cfg.memory_nodes)
        throw ModelError("policy was trained with memory=" + std::to_string(p.memory_nodes()) + " but --fsc-k is " +
                         std::to_string(cfg.memory_nodes));
      ExtractReport rep;
      const ObservationStrategy s = extract_strategy(p, work, cfg.memory_nodes, &rep, predictions);
      write_file(out, serialize_strategy(s, work.actions));
      if (!fsc_out.empty()) write_file(fsc_out, serialize_fsc(project_fsc(s, delta), m.actions));
      if (rep.fallbacks) std::cerr << rep.fallbacks << " rows fell back to uniform\n";
      man.doc["model_hash"] = model_hash(m);
      man.doc["config"] = {{"memory", ext_mem.to_json()}, {"predictions", predictions}, {"policy", policy_path}};
      man.write(manifest_for(manifest_path, out));
      return 0;
    }

    if (*syn) {
      Manifest man("synth", argc, argv);
      const Pomdp m = load_model(model_path);
      const Specification spec = parse_spec(spec_text);
      SynthesisConfig cfg = syn_mem.config(m);
      cfg.max_iterations = scfg.max_iterations;
      cfg.seed = scfg.seed;
      cfg.progress_epsilon = scfg.progress_epsilon;
      cfg.early_stop = scfg.early_stop;
      cfg.verify_improvements = !unverified;
      cfg.relative_fraction = scfg.relative_fraction;
      if (syn->count("--relative-criticality")) cfg.criticality = Criticality::Relative;
      cfg.sample_count = scfg.sample_count;
      cfg.resample_count = scfg.resample_count;
      cfg.max_len = scfg.max_len;
      cfg.train = scfg.train;
      cfg.train.epochs = epochs;
      cfg.threads = threads;

      fs::path dir = out_dir;
      if (!dir.empty()) fs::create_directories(dir);
      std::ostringstream csv;
      csv << "iter,value,critical_states,critical_decisions,train_loss,seconds\n";
      const Pomdp work = working_model(m, spec, cfg);
      cfg.on_iteration = [&](const IterationLog& row, const ObservationStrategy& s) {
        csv << row.iteration << ',' << fmt(row.value) << ',' << row.critical_states << ','
            << row.critical_decisions << ',' << fmt(row.train_loss) << ',' << fmt(row.seconds) << "\n";
        std::cerr << "iter " << row.iteration << " value " << fmt(row.value) << " critical " << row.critical_states
                  << "/" << row.critical_decisions << " improved " << row.improved_classes << " -> " << fmt(row.improved_value) << " loss "
                  << row.train_loss << " (" << row.seconds << " s)\n";
        if (!dir.empty())
          write_file(dir / ("iter" + std::to_string(row.iteration) + ".strat"), serialize_strategy(s, work.actions));
        if (!log_path.empty()) write_file(log_path, csv.str());
      };
      const SynthesisResult res = synthesize(m, spec, cfg);
      std::cout << fmt(res.best_value) << "\n";
      std::cerr << "best " << fmt(res.best_value) << " at iteration " << res.best_iteration << ", MDP bound "
                << fmt(res.mdp_value) << (spec.optimizes() ? "" : res.satisfied ? ", satisfied" : ", violated")
                << "\n";
      if (!dir.empty()) {
        write_file(dir / "best.strat", serialize_strategy(res.best, work.actions));
        if (res.best_fsc) write_file(dir / "best.fsc", serialize_fsc(*res.best_fsc, m.actions));
      }
      man.doc["model_hash"] = model_hash(m);
      man.doc["spec"] = to_string(spec);
      man.doc["seeds"] = {cfg.seed};
      man.doc["config"] = {{"iters", cfg.max_iterations}, {"epsilon", cfg.progress_epsilon},
                           {"early_stop", cfg.early_stop}, {"relative", cfg.relative_fraction},
                           {"criticality", cfg.criticality == Criticality::Relative ? "relative" : "uniform"},
                           {"samples", cfg.sample_count}, {"resamples", cfg.resample_count},
                           {"max_len", cfg.max_len}, {"epochs", cfg.train.epochs}, {"hidden", cfg.train.hidden},
                           {"lr", cfg.train.learning_rate}, {"batch", cfg.train.batch_size},
                           {"threads", cfg.threads}, {"verify_improvements", cfg.verify_improvements}, {"memory", syn_mem.to_json()}};
      man.doc["result"] = {{"best_value", res.best_value}, {"best_iteration", res.best_iteration},
                           {"mdp_value", res.mdp_value}, {"satisfied", res.satisfied}};
      fs::path mpath = manifest_path;
      if (mpath.empty() && !dir.empty()) mpath = dir / "manifest.json";
      if (mpath.empty() && !log_path.empty()) mpath = log_path + ".manifest.json";
      man.write(mpath);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
