#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "vsl/bench.hpp"
#include "vsl/checkpoint.hpp"
#include "vsl/config.hpp"
#include "vsl/error.hpp"
#include "vsl/instance.hpp"
#include "vsl/ledger.hpp"
#include "vsl/protocol.hpp"

namespace vsl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Overrides {
  std::string config_path;
  std::string mode;
  std::size_t clients = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t epochs = 0;
  CLI::Option* clients_opt = nullptr;
  CLI::Option* m_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
};

const std::vector<std::string> kModes = {"zk-snark", "zk-mock", "blockchain", "none"};

void add_common(CLI::App* cmd, Overrides& o, bool with_epochs) {
  cmd->add_option("--config", o.config_path, "JSON config, or a manifest.json from an earlier run")
      ->check(CLI::ExistingFile);
  cmd->add_option("--mode", o.mode, "zk-snark | zk-mock | blockchain | none")
      ->check(CLI::IsMember(kModes));
  o.clients_opt = cmd->add_option("--clients", o.clients, "number of clients (1-32)")
                      ->check(CLI::Range(std::size_t{1}, kMaxClients));
  o.m_opt = cmd->add_option("--m", o.m, "cut-layer width (500, 700, 1000 or any positive integer)")
                ->check(CLI::PositiveNumber);
  o.seed_opt = cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  if (with_epochs) {
    o.epochs_opt = cmd->add_option("--epochs", o.epochs, "training epochs")->check(CLI::PositiveNumber);
  }
}

SimConfig resolve(const Overrides& o) {
  SimConfig c = o.config_path.empty() ? SimConfig{} : load_config(o.config_path);
  if (!o.mode.empty()) c.mode = mode_from_string(o.mode);
  if (o.clients_opt && o.clients_opt->count()) c.num_clients = o.clients;
  if (o.m_opt && o.m_opt->count()) c.cut_width = o.m;
  if (o.seed_opt && o.seed_opt->count()) c.seed = o.seed;
  if (o.epochs_opt && o.epochs_opt->count()) c.epochs = o.epochs;
  if (!o.out.empty()) c.out_dir = o.out;
  return c;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw Error("cannot write " + path.string());
}

void write_manifest(const fs::path& out, const RunManifest& m) {
  write_json(out / "manifest.json", to_json(m));
}

RunManifest manifest_for(const std::string& command, const SimConfig& c, bool with_backend) {
  RunManifest m;
  m.command = command;
  m.config = c;
  m.seeds = derive_seeds(c.seed);
  if (with_backend && is_zk(c.mode)) m.backend = std::string(to_string(backend_for(c.mode)));
  return m;
}

Bytes seed_bytes(std::uint64_t seed) {
  ByteWriter w;
  w.u64(seed);
  return std::move(w).take();
}

// --- train -------------------------------------------------------------------

int cmd_train(const Overrides& o, bool as_json, std::ostream& out) {
  SimConfig c = resolve(o);
  c.validate();
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);

  RunManifest manifest = manifest_for("train", c, true);
  manifest.artifacts = {{"run_log", "run_log.jsonl"}, {"checkpoint", "checkpoint.json"}};
  if (c.mode == Mode::blockchain) manifest.artifacts["ledger"] = "ledger.jsonl";
  write_manifest(dir, manifest);

  Session session(c);
  std::ofstream log(dir / "run_log.jsonl", std::ios::trunc);
  if (!log) throw Error("cannot write " + (dir / "run_log.jsonl").string());

  json summary = {{"mode", std::string(to_string(c.mode))}, {"rounds", json::array()}};
  const std::size_t rounds = c.epochs * c.batches_per_epoch;
  for (std::size_t r = 0; r < rounds; ++r) {
    const RoundReport report = session.run_round();
    const json j = to_json(report);
    log << j.dump() << '\n';
    json verdicts = json::array();
    for (const auto& cl : report.clients) verdicts.push_back(std::string(to_string(cl.verdict)));
    summary["rounds"].push_back({{"round", report.round}, {"loss", j["loss"]}, {"verdicts", verdicts},
                                 {"stalled", report.stalled}});
    if (!as_json) {
      out << "round " << report.round << "  loss " << (j["loss"].is_null() ? std::string("-") : j["loss"].dump())
          << "  verdicts";
      for (const auto& v : verdicts) out << ' ' << v.get<std::string>();
      if (report.stalled) out << "  (stalled)";
      out << '\n';
    }
  }
  log.flush();

  save_checkpoint(dir.string(), "checkpoint", session.model(),
                  {{"rounds", rounds}, {"constants", c.circuit_constants()}, {"seed", c.seed}});
  if (const Chain* chain = session.ledger()) save_chain((dir / "ledger.jsonl").string(), chain->blocks());

  if (as_json) out << summary.dump(2) << '\n';
  return kExitOk;
}

// --- bench -------------------------------------------------------------------

int cmd_bench(const Overrides& o, std::size_t reps, bool as_json, std::ostream& out,
              std::ostream& err, const std::atomic<bool>* stop) {
  SimConfig c = resolve(o);
  if (!o.mode.empty()) c.bench.modes = {c.mode};
  if (o.clients_opt && o.clients_opt->count()) c.bench.clients = {o.clients};
  if (o.m_opt && o.m_opt->count()) c.bench.widths = {o.m};
  if (reps > 0) c.bench.reps = reps;
  c.validate();
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);

  RunManifest manifest = manifest_for("bench", c, false);
  manifest.artifacts = {{"csv", "bench.csv"}, {"json", "bench.json"}};
  write_manifest(dir, manifest);

  BenchHooks hooks;
  hooks.stop = stop;
  hooks.progress = [&](const std::string& s) { err << "bench: " << s << '\n'; };
  auto records = run_benchmark(c, hooks);
  emit_csv((dir / "bench.csv").string(), records);
  emit_json((dir / "bench.json").string(), records);

  if (as_json) {
    json rows = json::array();
    for (const auto& s : summarize(records)) rows.push_back(to_json(s));
    out << rows.dump(2) << '\n';
  } else {
    for (const auto& s : summarize(records)) {
      out << s.metric << ' ' << s.mode << " clients=" << s.clients << " m=" << s.m
          << " median=" << s.median << ' ' << s.unit << '\n';
    }
  }
  if (stop != nullptr && stop->load()) {
    err << "bench: interrupted, wrote " << records.size() << " records\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// --- prove / verify ------------------------------------------------------------

CircuitInstance read_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read instance " + path);
  try {
    const json j = json::parse(f);
    CircuitInstance inst;
    inst.kind = circuit_kind_from_string(j.at("kind").get<std::string>());
    inst.m = j.at("m").get<std::size_t>();
    inst.n = j.value("n", std::size_t{1});
    inst.public_values = j.at("public").get<std::vector<std::int64_t>>();
    inst.private_values = j.at("private").get<std::vector<std::int64_t>>();
    return inst;
  } catch (const json::exception& e) {
    throw ConfigError("malformed instance " + path + ": " + e.what());
  }
}

struct ProveArgs {
  std::string kind = "cut-update";
  std::size_t n = 1;
  std::string instance;
};

int cmd_prove(const Overrides& o, const ProveArgs& a, bool as_json, std::ostream& out) {
  SimConfig c = resolve(o);
  if (o.mode.empty() && o.config_path.empty()) c.mode = Mode::zk_mock;
  c.validate();
  if (!is_zk(c.mode)) throw ConfigError("prove needs --mode zk-mock or zk-snark");
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);

  const CircuitConstants constants = c.circuit_constants();
  CircuitInstance inst;
  if (!a.instance.empty()) {
    inst = read_instance(a.instance);
  } else {
    std::mt19937_64 rng(c.seed);
    inst = random_instance(circuit_kind_from_string(a.kind), c.cut_width, a.n, constants, rng);
  }
  const ConstraintSystem cs = build_circuit(inst, constants);
  const Witness witness = generate_witness(cs, inst);
  const Statement x = Statement::from_witness(witness);
  const auto backend = make_backend(backend_for(c.mode));
  const KeyPair keys = backend->setup(cs, seed_bytes(derive_seeds(c.seed).setup));
  const Proof proof = backend->prove(keys.pk, x, witness);

  RunManifest manifest = manifest_for("prove", c, true);
  manifest.artifacts = {{"verifying_key", "vk.bin"}, {"statement", "statement.bin"},
                        {"proof", "proof.bin"}, {"public_instance", "instance.json"}};
  write_manifest(dir, manifest);
  write_file((dir / "vk.bin").string(), encode(keys.vk));
  write_file((dir / "statement.bin").string(), x.encode());
  write_file((dir / "proof.bin").string(), encode(proof));
  write_json(dir / "instance.json", {{"kind", std::string(to_string(inst.kind))},
                                     {"m", inst.m},
                                     {"n", inst.n},
                                     {"public", inst.public_values},
                                     {"constants", constants}});

  const json info = {{"backend", std::string(to_string(backend->id()))},
                     {"circuit_digest", to_hex(keys.vk.circuit_digest)},
                     {"statement_digest", to_hex(x.digest())},
                     {"constraints", cs.constraints.size()},
                     {"proof_bytes", encode(proof).size()},
                     {"prove_seconds", proof.prove_seconds}};
  if (as_json) {
    out << info.dump(2) << '\n';
  } else {
    out << "proved " << to_string(inst.kind) << " m=" << inst.m << " with " << to_string(backend->id())
        << " (" << cs.constraints.size() << " constraints)\n"
        << "statement " << to_hex(x.digest()) << '\n';
  }
  return kExitOk;
}

struct VerifyArgs {
  std::string vk;
  std::string statement;
  std::string proof;
};

int report_verdict(bool ok, const std::string& detail, bool as_json, std::ostream& out) {
  if (as_json) {
    json j = {{"verdict", ok ? "Accept" : "Reject"}};
    if (!detail.empty()) j["detail"] = detail;
    out << j.dump() << '\n';
  } else {
    out << (ok ? "Accept" : "Reject") << (detail.empty() ? "" : ": " + detail) << '\n';
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_verify(const VerifyArgs& a, bool as_json, std::ostream& out) {
  const VerifyingKey vk = decode_verifying_key(read_file(a.vk));
  Statement x;
  Proof proof;
  try {
    x = Statement::decode(read_file(a.statement));
    proof = decode_proof(read_file(a.proof));
  } catch (const DecodeError& e) {
    return report_verdict(false, e.what(), as_json, out);
  }
  const auto backend = make_backend(vk.backend);
  return report_verdict(backend->verify(vk, x, proof) == VerifyResult::accept, "", as_json, out);
}

// --- ledger / circuit ------------------------------------------------------------

int cmd_ledger_verify(const std::string& path, bool as_json, std::ostream& out) {
  const auto blocks = load_chain(path);
  const bool ok = verify_chain(blocks);
  if (as_json) {
    out << json{{"valid", ok}, {"blocks", blocks.size()}}.dump() << '\n';
  } else {
    out << (ok ? "valid" : "INVALID") << " chain of " << blocks.size() << " blocks\n";
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_circuit_export(const Overrides& o, const ProveArgs& a, std::ostream& out) {
  SimConfig c = resolve(o);
  c.validate();
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  const CircuitConstants constants = c.circuit_constants();
  ConstraintSystem cs;
  switch (circuit_kind_from_string(a.kind)) {
    case CircuitKind::aggregation: cs = build_aggregation_circuit(c.cut_width, a.n, constants); break;
    case CircuitKind::update: cs = build_update_circuit(c.cut_width, constants); break;
    case CircuitKind::cut_update: cs = build_cut_update_circuit(c.cut_width, constants); break;
    case CircuitKind::empty: cs = build_empty_circuit(); break;
  }
  write_json(dir / "circuit.json", circuit_to_json(cs));
  out << "wrote " << (dir / "circuit.json").string() << " (" << cs.constraints.size()
      << " constraints, digest " << to_hex(circuit_digest(cs)) << ")\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* stop) {
  CLI::App app{"Verifiable split learning: training, proofs, ledger baseline and benchmarks", "vsl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");

  Overrides train_o, bench_o, prove_o, export_o;
  auto* train = app.add_subcommand("train", "run protocol rounds; writes run log, checkpoint, manifest");
  add_common(train, train_o, true);
  train->add_flag("--json", as_json, "machine-readable output");

  std::size_t reps = 0;
  auto* bench = app.add_subcommand("bench", "time every mode/width/client cell; writes CSV and JSON");
  add_common(bench, bench_o, false);
  bench->add_option("--reps", reps, "repetitions per cell (at least 5 for trend checks)")
      ->check(CLI::PositiveNumber);
  bench->add_flag("--json", as_json, "machine-readable output");

  ProveArgs prove_a;
  auto* prove = app.add_subcommand("prove", "set up, prove one circuit instance, write vk/statement/proof");
  add_common(prove, prove_o, false);
  prove->add_option("--kind", prove_a.kind, "aggregation | update | cut-update")
      ->check(CLI::IsMember({"aggregation", "update", "cut-update"}));
  prove->add_option("--n", prove_a.n, "aggregation fan-in")->check(CLI::Range(1, 64));
  prove->add_option("--instance", prove_a.instance, "instance JSON {kind, m, n, public, private}")
      ->check(CLI::ExistingFile);
  prove->add_flag("--json", as_json, "machine-readable output");

  VerifyArgs verify_a;
  auto* verify = app.add_subcommand("verify", "verify a proof against a statement; exit 2 on reject");
  verify->add_option("--vk", verify_a.vk)->required()->check(CLI::ExistingFile);
  verify->add_option("--statement", verify_a.statement)->required()->check(CLI::ExistingFile);
  verify->add_option("--proof", verify_a.proof)->required()->check(CLI::ExistingFile);
  verify->add_flag("--json", as_json, "machine-readable output");

  auto* ledger = app.add_subcommand("ledger", "hash-chain ledger tools");
  ledger->require_subcommand(1);
  std::string chain_path;
  auto* ledger_verify = ledger->add_subcommand("verify", "check linkage and hashes; exit 2 if broken");
  ledger_verify->add_option("--chain", chain_path, "ledger.jsonl")->required()->check(CLI::ExistingFile);
  ledger_verify->add_flag("--json", as_json, "machine-readable output");

  auto* circuit = app.add_subcommand("circuit", "circuit tools");
  circuit->require_subcommand(1);
  ProveArgs export_a;
  auto* circuit_export = circuit->add_subcommand("export", "write circuit.json");
  add_common(circuit_export, export_o, false);
  circuit_export->add_option("--kind", export_a.kind, "aggregation | update | cut-update")
      ->check(CLI::IsMember({"aggregation", "update", "cut-update"}));
  circuit_export->add_option("--n", export_a.n, "aggregation fan-in")->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_o, as_json, out);
    if (*bench) return cmd_bench(bench_o, reps, as_json, out, err, stop);
    if (*prove) return cmd_prove(prove_o, prove_a, as_json, out);
    if (*verify) return cmd_verify(verify_a, as_json, out);
    if (*ledger_verify) return cmd_ledger_verify(chain_path, as_json, out);
    if (*circuit_export) return cmd_circuit_export(export_o, export_a, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace vsl::cli
