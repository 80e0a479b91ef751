#include "canids/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "canids/baselines.hpp"
#include "canids/canbus.hpp"
#include "canids/checkpoint.hpp"
#include "canids/dataset_io.hpp"
#include "canids/error.hpp"
#include "canids/ingest.hpp"
#include "canids/metrics.hpp"
#include "canids/plenet.hpp"
#include "canids/report.hpp"
#include "canids/rng.hpp"
#include "canids/simd.hpp"

namespace canids::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s, Errc code, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(code, "bad number for " + what + ": '" + std::string(s) + "'");
  }
}

std::uint16_t to_id(std::string_view s, Errc code) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const auto v = std::stoul(str, &used, 16);
    if (used != str.size() || v > canbus::kMaxIdentifier) throw std::invalid_argument("range");
    return static_cast<std::uint16_t>(v);
  } catch (const std::exception&) {
    throw Error(code, "bad 11-bit hex identifier '" + std::string(s) + "'");
  }
}

std::vector<std::uint8_t> to_bytes(std::string_view s) {
  std::vector<std::uint8_t> out;
  for (auto tok : split(s, ' ')) {
    if (tok.empty()) continue;
    if (tok.size() != 2) throw Error(Errc::InvalidProfile, "payload bytes must be two hex digits");
    out.push_back(static_cast<std::uint8_t>(to_id(tok, Errc::InvalidProfile) & 0xFF));
  }
  return out;
}

ingest::PreparedDataset load_data(const std::string& path) { return ingest::load_dataset(path); }

// Artifacts name their inputs by file name only, so a run reproduces byte for
// byte wherever its working directory happens to be.
std::string base_name(const std::string& path) { return std::filesystem::path(path).filename().string(); }

std::vector<std::uint8_t> labels_of(const ingest::Partition& p) {
  std::vector<std::uint8_t> out;
  out.reserve(p.size());
  for (const auto& r : p.rows) out.push_back(r.y);
  return out;
}

metrics::MetricsReport score(const ingest::Partition& part, const std::vector<std::uint8_t>& predictions,
                             const std::vector<double>& scores) {
  const auto labels = labels_of(part);
  return metrics::evaluate_predictions(labels, predictions, scores, part.kinds);
}

metrics::MetricsReport score_network(const nn::Network& model, const ingest::Partition& part) {
  const auto preds = plenet::predict(model, part.rows);
  std::vector<std::uint8_t> hard;
  std::vector<double> scores;
  for (const auto& p : preds) {
    hard.push_back(p.label);
    scores.push_back(p.p_attack);
  }
  return score(part, hard, scores);
}

const ingest::Partition& pick_split(const ingest::PreparedDataset& ds, const std::string& split) {
  if (split == "train") return ds.train;
  if (split == "validation") return ds.validation;
  return ds.test;
}

struct TrainOptions {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr = 0.001;
  std::size_t patience = 50;
  std::uint64_t seed = 0;
  bool quiet = false;

  plenet::TrainConfig config() const { return {epochs, batch_size, lr, patience, seed}; }
  std::string canonical(const std::string& model) const {
    std::ostringstream s;
    s << "model=" << model << ";epochs=" << epochs << ";batch=" << batch_size << ";lr=" << lr
      << ";patience=" << patience << ";seed=" << seed;
    return s.str();
  }
};

void add_train_options(CLI::App* cmd, TrainOptions& t) {
  cmd->add_option("--epochs", t.epochs, "Maximum epochs")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", t.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--patience", t.patience, "Early-stopping patience (epochs)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", t.seed, "Initialization and shuffle seed")->capture_default_str();
  cmd->add_flag("--quiet", t.quiet, "Suppress per-epoch progress");
}

plenet::EpochCallback progress(std::ostream& out, bool quiet) {
  if (quiet) return {};
  return [&out](std::size_t epoch, const plenet::EpochStats& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %4zu  loss %.4f  acc %.4f  val_loss %.4f  val_acc %.4f\n", epoch + 1,
                  s.train_loss, s.train_acc, s.val_loss, s.val_acc);
    out << buf;
  };
}

void write_history(const std::string& path, const plenet::TrainHistory& h) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path);
  report::write_history_csv(out, h);
}

nn::Network build_model(const std::string& name, std::uint64_t seed) {
  if (name == "mlp") return baselines::build_mlp(seed);
  return plenet::build_plenet(seed);
}

}  // namespace

canbus::SimProfile parse_profile(std::istream& in) {
  if (!in.good()) throw Error(Errc::UnreadableStream, "cannot read profile");
  canbus::SimProfile p;
  std::string line;
  while (std::getline(in, line)) {
    auto view = trim(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = trim(view.substr(0, hash));
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::InvalidProfile, "expected key=value: " + std::string(view));
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (key == "duration") {
      p.duration = to_double(value, Errc::InvalidProfile, "duration");
    } else if (key == "jitter") {
      p.jitter_fraction = to_double(value, Errc::InvalidProfile, "jitter");
    } else if (key == "seed") {
      p.seed = static_cast<std::uint64_t>(to_double(value, Errc::InvalidProfile, "seed"));
    } else if (key == "ecu") {
      const auto f = split(value, ',');
      if (f.size() != 4) throw Error(Errc::InvalidProfile, "ecu needs id,period,rule,payload");
      canbus::EcuSchedule ecu;
      ecu.identifier = to_id(f[0], Errc::InvalidProfile);
      ecu.period = to_double(f[1], Errc::InvalidProfile, "period");
      const auto rule = canbus::parse_payload_rule(f[2]);
      if (!rule) throw Error(Errc::InvalidProfile, "unknown payload rule '" + std::string(f[2]) + "'");
      ecu.rule = *rule;
      ecu.base_payload = to_bytes(f[3]);
      p.ecu_schedule.push_back(std::move(ecu));
    } else {
      throw Error(Errc::InvalidProfile, "unknown profile key '" + std::string(key) + "'");
    }
  }
  canbus::validate(p);
  return p;
}

canbus::AttackSpec parse_attack(std::string_view text) {
  const auto f = split(text, ':');
  if (f.size() < 4 || f.size() > 5) throw Error(Errc::InvalidAttackSpec, "expected kind:start:end:rate[:ids]");
  canbus::AttackSpec spec;
  const auto kind = parse_attack_kind(f[0]);
  if (!kind || *kind == AttackKind::None) throw Error(Errc::InvalidAttackSpec, "unknown attack kind '" + std::string(f[0]) + "'");
  spec.kind = *kind;
  spec.start = to_double(f[1], Errc::InvalidAttackSpec, "start");
  spec.end = to_double(f[2], Errc::InvalidAttackSpec, "end");
  spec.rate = to_double(f[3], Errc::InvalidAttackSpec, "rate");
  if (f.size() == 5) {
    for (auto id : split(f[4], '/')) {
      if (!id.empty()) spec.spoof_targets.push_back(to_id(id, Errc::InvalidAttackSpec));
    }
  }
  return spec;
}

std::vector<std::string> config_tokens(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto view = trim(line);
    if (view.empty() || view.front() == '#' || view.front() == ';' || view.front() == '[') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::InvalidArgument, "config line is not key=value: " + line);
    out.push_back("--" + std::string(trim(view.substr(0, eq))) + "=" + std::string(trim(view.substr(eq + 1))));
  }
  return out;
}

int run_command(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  // --config FILE: its key=value lines are spliced in right after the
  // subcommand so that later command-line flags take precedence.
  std::vector<std::string> args;
  try {
    std::vector<std::string> config;
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
      std::string path;
      if (raw_args[i] == "--config" && i + 1 < raw_args.size()) {
        path = raw_args[++i];
      } else if (raw_args[i].starts_with("--config=")) {
        path = raw_args[i].substr(9);
      } else {
        args.push_back(raw_args[i]);
        continue;
      }
      std::ifstream cfg(path);
      if (!cfg) {
        err << "error: cannot read config file " << path << '\n';
        return kExitUsage;
      }
      const auto tokens = config_tokens(cfg);
      config.insert(config.end(), tokens.begin(), tokens.end());
    }
    if (!config.empty() && !args.empty()) args.insert(args.begin() + 1, config.begin(), config.end());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"CAN bus intrusion detection toolkit"};
  app.name("canids");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "Plain-text key=value file; command-line flags override it");

  // simulate
  std::string profile_path, sim_out;
  std::vector<std::string> attacks;
  std::uint64_t sim_seed = 0;
  bool with_kind = false;
  auto* sim = app.add_subcommand("simulate", "Generate a labeled traffic log");
  sim->add_option("--profile", profile_path, "ECU profile file")->required()->check(CLI::ExistingFile);
  sim->add_option("--attack", attacks, "kind:start:end:rate[:id/id] (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Seed for traffic and attacks");
  sim->add_option("-o,--output", sim_out, "Output CSV ('-' for stdout)")->required();
  sim->add_flag("--with-kind", with_kind, "Append an Attack_Kind provenance column");

  // prepare
  std::vector<std::string> inputs;
  std::string prep_out, impute = "drop";
  ingest::PrepareConfig prep;
  bool show_corr = false;
  auto* pre = app.add_subcommand("prepare", "Clean, encode and split logs into a dataset container");
  pre->add_option("-i,--input", inputs, "Input log CSV (repeatable)")
      ->required()
      ->check(CLI::ExistingFile)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  pre->add_option("-o,--output", prep_out, "Output container path")->required();
  pre->add_option("--seed", prep.split.seed, "Split seed")->capture_default_str();
  pre->add_option("--test-fraction", prep.split.test_fraction)->capture_default_str()->check(CLI::Range(0.0, 0.99));
  pre->add_option("--val-fraction", prep.split.val_fraction)->capture_default_str()->check(CLI::Range(0.0, 0.99));
  pre->add_option("--impute", impute, "Missing-value policy")->check(CLI::IsMember({"drop", "mean"}))->capture_default_str();
  pre->add_flag("--remove-dlc-outliers", prep.remove_dlc_outliers, "Drop DLC outliers found by Rosner's test");
  pre->add_option("--max-outliers", prep.max_outliers)->capture_default_str()->check(CLI::PositiveNumber);
  pre->add_option("--alpha", prep.outlier_alpha)->capture_default_str()->check(CLI::Range(1e-9, 0.999));
  pre->add_flag("--correlation", show_corr, "Print the Pearson correlation matrix of the raw columns");

  // train
  std::string data_path, ckpt_out, history_path, model_name = "plenet";
  TrainOptions topt;
  auto* trn = app.add_subcommand("train", "Train P-LeNet (or the MLP) on a prepared dataset");
  trn->add_option("-d,--data", data_path, "Dataset container")->required()->check(CLI::ExistingFile);
  trn->add_option("-o,--output", ckpt_out, "Checkpoint path")->required();
  trn->add_option("--model", model_name)->check(CLI::IsMember({"plenet", "mlp"}))->capture_default_str();
  trn->add_option("--history", history_path, "Per-epoch CSV (default <output>.history.csv)");
  add_train_options(trn, topt);

  // evaluate
  std::string eval_ckpt, eval_data, eval_split = "test", eval_report;
  bool eval_reference = false;
  auto* evl = app.add_subcommand("evaluate", "Score a checkpoint on a dataset partition");
  evl->add_option("-m,--model", eval_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  evl->add_option("-d,--data", eval_data, "Dataset container")->required()->check(CLI::ExistingFile);
  evl->add_option("--split", eval_split)->check(CLI::IsMember({"train", "validation", "test"}))->capture_default_str();
  evl->add_option("-o,--output", eval_report, "Report stem (writes .json and .txt)");
  evl->add_flag("--reference", eval_reference, "Append reference figures for the Car-Hacking data");

  // transfer
  std::string src_ckpt, tgt_data, xfer_out, freeze = "conv", xfer_history, source_data;
  TrainOptions xopt;
  auto* xfer = app.add_subcommand("transfer", "Fine-tune a source checkpoint on a target dataset");
  xfer->add_option("-m,--model", src_ckpt, "Source checkpoint")->required()->check(CLI::ExistingFile);
  xfer->add_option("-d,--data", tgt_data, "Target dataset container")->required()->check(CLI::ExistingFile);
  xfer->add_option("-o,--output", xfer_out, "Fine-tuned checkpoint path")->required();
  xfer->add_option("--freeze", freeze)->check(CLI::IsMember({"conv", "none"}))->capture_default_str();
  xfer->add_option("--history", xfer_history, "Per-epoch CSV (default <output>.history.csv)");
  xfer->add_option("--source-data", source_data, "Source dataset; prints the domain distance")
      ->check(CLI::ExistingFile);
  add_train_options(xfer, xopt);

  // compare
  std::string cmp_data, cmp_report;
  std::vector<std::string> cmp_models{"plenet", "knn", "dt", "mlp"};
  std::size_t knn_k = 12, max_depth = 16, min_leaf = 1;
  bool cmp_reference = false;
  TrainOptions copt;
  copt.quiet = true;
  auto* cmp = app.add_subcommand("compare", "Train and score P-LeNet, KNN, DT and MLP on one dataset");
  cmp->add_option("-d,--data", cmp_data, "Dataset container")->required()->check(CLI::ExistingFile);
  cmp->add_option("-o,--output", cmp_report, "Report stem (writes .json and .txt)");
  cmp->add_option("--models", cmp_models, "Subset of plenet,knn,dt,mlp")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::IsMember({"plenet", "knn", "dt", "mlp"}));
  cmp->add_option("--k", knn_k, "KNN neighbours")->capture_default_str()->check(CLI::PositiveNumber);
  cmp->add_option("--max-depth", max_depth, "Decision-tree depth limit")->capture_default_str();
  cmp->add_option("--min-leaf", min_leaf, "Decision-tree minimum leaf size")->capture_default_str();
  cmp->add_flag("--reference", cmp_reference, "Append reference figures for the Car-Hacking data");
  add_train_options(cmp, copt);

  // gradcheck
  std::size_t gc_seeds = 20, gc_batch = 4;
  double gc_h = 1e-5, gc_tol = 1e-5;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of P-LeNet and MLP gradients");
  gc->add_option("--seeds", gc_seeds)->capture_default_str()->check(CLI::PositiveNumber);
  gc->add_option("--batch", gc_batch)->capture_default_str()->check(CLI::PositiveNumber);
  gc->add_option("--step", gc_h, "Central-difference step")->capture_default_str();
  gc->add_option("--tolerance", gc_tol)->capture_default_str();

  std::vector<const char*> argv{"canids"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      std::ifstream pf(profile_path);
      auto profile = parse_profile(pf);
      if (sim_seed_opt->count() > 0) profile.seed = sim_seed;
      std::vector<canbus::AttackSpec> specs;
      for (std::size_t i = 0; i < attacks.size(); ++i) {
        auto spec = parse_attack(attacks[i]);
        spec.seed = mix_seed(profile.seed, i + 1);
        specs.push_back(std::move(spec));
      }
      auto log = canbus::generate_traffic(profile);
      for (const auto& spec : specs) log = canbus::inject_attack(log, spec, profile.duration);
      if (sim_out == "-") {
        canbus::write_log(out, log, with_kind);
      } else {
        std::ofstream f(sim_out, std::ios::binary);
        if (!f) throw Error(Errc::IoFailure, "cannot write " + sim_out);
        canbus::write_log(f, log, with_kind);
        std::size_t attack_rows = 0;
        for (const auto& r : log) attack_rows += r.label == Label::Attack;
        out << "wrote " << log.size() << " records (" << attack_rows << " attack) to " << sim_out << '\n';
      }
      return kExitOk;
    }

    if (pre->parsed()) {
      prep.impute = impute == "mean" ? ingest::ImputePolicy::FieldMean : ingest::ImputePolicy::DropRow;
      std::vector<std::vector<ingest::RawRecord>> logs;
      for (const auto& path : inputs) {
        std::ifstream f(path);
        if (!f) throw Error(Errc::UnreadableStream, "cannot open " + path);
        logs.push_back(ingest::parse_log(f));
      }
      if (show_corr) {
        std::vector<ingest::RawRecord> all;
        for (const auto& l : logs) all.insert(all.end(), l.begin(), l.end());
        const auto cols = ingest::correlation_columns(all);
        const auto cm = stats::correlation_matrix(cols);
        out << "pearson r (p-value):\n";
        for (std::size_t i = 0; i < cm.names.size(); ++i) {
          out << "  " << cm.names[i] << ':';
          for (std::size_t j = 0; j < cm.names.size(); ++j) {
            char buf[64];
            std::snprintf(buf, sizeof buf, " %8.4f (%.2e)%s", cm.r[i][j], cm.p_value[i][j], cm.significant[i][j] ? "*" : " ");
            out << buf;
          }
          out << '\n';
        }
      }
      ingest::PrepareSummary summary;
      auto ds = ingest::prepare(logs, prep, &summary);
      std::ostringstream prov;
      prov << "inputs=";
      for (std::size_t i = 0; i < inputs.size(); ++i) prov << (i ? "|" : "") << base_name(inputs[i]);
      prov << ";impute=" << impute << ";dlc_outliers=" << (prep.remove_dlc_outliers ? "on" : "off")
           << ";test_fraction=" << prep.split.test_fraction << ";val_fraction=" << prep.split.val_fraction;
      ds.provenance = prov.str();
      ingest::save_dataset(prep_out, ds);
      out << "rows: raw " << summary.raw_rows << ", after imputation " << summary.after_imputation
          << ", outliers removed " << summary.outliers_removed << ", usable " << summary.after_integration << '\n';
      out << "partitions: train " << ds.train.size() << ", validation " << ds.validation.size() << ", test "
          << ds.test.size() << '\n';
      return kExitOk;
    }

    if (trn->parsed()) {
      const auto ds = load_data(data_path);
      auto model = build_model(model_name, topt.seed);
      const auto history = plenet::train(model, ds, topt.config(), {}, progress(out, topt.quiet));
      checkpoint::save_checkpoint({model, ds.norm, topt.seed, checkpoint::digest(topt.canonical(model_name))}, ckpt_out);
      write_history(history_path.empty() ? ckpt_out + ".history.csv" : history_path, history);
      const auto& best = history.epochs[history.best_epoch];
      out << "best epoch " << history.best_epoch + 1 << " of " << history.epochs.size() << ": val_acc "
          << report::round4(best.val_acc) << "; checkpoint " << ckpt_out << '\n';
      return kExitOk;
    }

    if (evl->parsed()) {
      const auto ckpt = checkpoint::load_checkpoint(eval_ckpt);
      const auto ds = load_data(eval_data);
      const std::vector<report::ModelRow> rows{{"checkpoint", score_network(ckpt.model, pick_split(ds, eval_split))}};
      out << report::text_table(rows);
      if (eval_reference) out << '\n' << report::reference_footer();
      if (!eval_report.empty()) report::write_report(eval_report, rows, base_name(eval_data) + ":" + eval_split, eval_reference);
      return kExitOk;
    }

    if (xfer->parsed()) {
      const auto src = checkpoint::load_checkpoint(src_ckpt);
      const auto target = load_data(tgt_data);
      if (!source_data.empty()) {
        const auto source = load_data(source_data);
        out << "domain distance (source train vs target train): "
            << report::round4(plenet::mmd_distance(source.train.rows, target.train.rows)) << '\n';
      }
      const auto mode = freeze == "conv" ? plenet::FreezeMode::ConvFrozen : plenet::FreezeMode::None;
      auto result = plenet::transfer_finetune(src.model, target, xopt.config(), mode, progress(out, xopt.quiet));
      checkpoint::save_checkpoint(
          {result.model, target.norm, xopt.seed, checkpoint::digest(xopt.canonical("transfer:" + freeze))}, xfer_out);
      write_history(xfer_history.empty() ? xfer_out + ".history.csv" : xfer_history, result.history);
      out << "fine-tuned (freeze=" << freeze << ") best epoch " << result.history.best_epoch + 1 << "; checkpoint "
          << xfer_out << '\n';
      return kExitOk;
    }

    if (cmp->parsed()) {
      const auto ds = load_data(cmp_data);
      std::vector<report::ModelRow> rows;
      for (const auto& name : cmp_models) {
        if (name == "plenet" || name == "mlp") {
          auto model = build_model(name, copt.seed);
          plenet::train(model, ds, copt.config(), {}, progress(out, copt.quiet));
          rows.push_back({name == "plenet" ? "P-LeNet" : "MLP", score_network(model, ds.test)});
        } else if (name == "knn") {
          const auto knn = baselines::knn_fit(ds.train.rows, knn_k);
          const auto votes = baselines::knn_predict(knn, ds.test.rows);
          std::vector<std::uint8_t> hard;
          std::vector<double> scores;
          for (const auto& v : votes) {
            hard.push_back(v.label);
            scores.push_back(v.attack_fraction);
          }
          rows.push_back({"KNN(k=" + std::to_string(knn_k) + ")", score(ds.test, hard, scores)});
        } else if (name == "dt") {
          const auto tree = baselines::tree_fit(ds.train.rows, max_depth, min_leaf);
          std::vector<std::uint8_t> hard;
          std::vector<double> scores;
          for (const auto& r : ds.test.rows) {
            hard.push_back(baselines::tree_predict(tree, r.x));
            scores.push_back(baselines::tree_attack_score(tree, r.x));
          }
          rows.push_back({"DT", score(ds.test, hard, scores)});
        }
      }
      out << report::text_table(rows);
      if (cmp_reference) out << '\n' << report::reference_footer();
      if (!cmp_report.empty()) report::write_report(cmp_report, rows, base_name(cmp_data) + ":test", cmp_reference);
      return kExitOk;
    }

    if (gc->parsed()) {
      bool ok = true;
      for (const std::string name : {"plenet", "mlp"}) {
        double worst = 0.0;
        std::size_t checked = 0, skipped = 0;
        for (std::size_t s = 0; s < gc_seeds; ++s) {
          const auto net = build_model(name, s);
          Rng rng(mix_seed(s, 99));
          std::vector<nn::Tensor> batch;
          std::vector<std::size_t> labels;
          for (std::size_t b = 0; b < gc_batch; ++b) {
            std::vector<double> x(ingest::kFeatureWidth);
            for (auto& v : x) v = uniform01(rng);
            batch.emplace_back(ingest::kFeatureWidth, 1, std::move(x));
            labels.push_back(uniform_below(rng, 2));
          }
          const auto r = nn::grad_check(net, batch, labels, gc_h);
          worst = std::max(worst, r.max_rel_error);
          checked += r.checked;
          skipped += r.skipped;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-7s max rel err %.3e over %zu parameters (%zu kink-adjacent skipped)\n",
                      name.c_str(), worst, checked, skipped);
        out << buf;
        ok = ok && worst < gc_tol;
      }
      out << "kernels: " << simd::isa_name(simd::active().isa) << '\n';
      return ok ? kExitOk : kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace canids::cli
