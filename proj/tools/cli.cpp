#include "cli.hpp"

#include "run_config.hpp"

#include "gsn/chainlab.hpp"
#include "gsn/checkpoint.hpp"
#include "gsn/datasets.hpp"
#include "gsn/numeric.hpp"
#include "gsn/parzen.hpp"
#include "gsn/sampler.hpp"
#include "gsn/trainer.hpp"
#include "gsn/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>

namespace gsn::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  RunConfig cfg;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;
};

// Keys holding file paths; relative values in a config file are taken
// relative to that file.
bool is_path_key(const std::string& key) {
  return key == "data_path" || key == "checkpoint" || key == "clamp_mask" || key == "clamp_values" ||
         key == "samples_path";
}

fs::path required_file(const RunConfig& cfg, const std::string& key, const std::string& why) {
  if (!cfg.has_value(key)) throw ParameterError("config key '" + key + "' is required " + why);
  const fs::path p = cfg.get(key);
  if (!fs::exists(p)) throw ParameterError("config key '" + key + "': file '" + p.string() + "' does not exist");
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << text;
}

GsnConfig model_config(const RunConfig& cfg, Index visible_size) {
  GsnConfig gc;
  gc.visible_size = visible_size;
  for (long long h : cfg.integer_list("hidden")) gc.hidden_sizes.push_back(static_cast<Index>(h));
  gc.eta_in = cfg.real("eta_in");
  gc.eta_out = cfg.real("eta_out");
  gc.input_corruption_p = cfg.real("corruption");
  gc.walkback_steps = static_cast<Index>(cfg.integer("walkback"));
  const std::string& v = cfg.get("visible");
  if (v == "binary") gc.visible_kind = VisibleKind::Binary;
  else if (v == "real") gc.visible_kind = VisibleKind::Real;
  else throw ParameterError("config key 'visible' expects binary or real, got '" + v + "'");
  gc.seed = cfg.unsigned_integer("seed");
  gc.corrupt_every_step = cfg.flag("corrupt_every_step");
  gc.persist_h0 = cfg.flag("persist_h0");
  gc.validate();
  return gc;
}

Dataset load_dataset(const RunConfig& cfg) {
  const std::string& source = cfg.get("data_source");
  Dataset ds;
  if (source == "toy") {
    ToyOptions opts;
    opts.bits = static_cast<Index>(cfg.integer("toy_bits"));
    ds = make_toy(parse_toy_kind(cfg.get("toy_kind")), static_cast<Index>(cfg.integer("toy_n")),
                  cfg.unsigned_integer("seed"), opts);
  } else if (source == "csv") {
    ds.examples = read_csv(required_file(cfg, "data_path", "when data_source = csv"));
    ds.splits.assign(static_cast<std::size_t>(ds.examples.rows()), Split::Train);
    const bool binary = (ds.examples.array() == 0.0 || ds.examples.array() == 1.0).all();
    ds.kind = binary ? ValueKind::Binary : ValueKind::Real;
  } else if (source == "idx") {
    ds = load_idx(required_file(cfg, "data_path", "when data_source = idx"),
                  cfg.flag("data_binarize") ? ValueKind::Binary : ValueKind::Unit);
    const auto factor = static_cast<Index>(cfg.integer("data_downsample"));
    if (factor > 1) ds = downsample(ds, factor);
  } else {
    throw ParameterError("config key 'data_source' expects toy, csv or idx, got '" + source + "'");
  }
  const auto limit = static_cast<Index>(cfg.integer("data_limit"));
  if (limit > 0 && limit < ds.size()) {
    ds.examples = ds.examples.topRows(limit).eval();
    ds.splits.resize(static_cast<std::size_t>(limit));
  }
  if (ds.size() < 1) throw ParameterError("dataset is empty");
  return ds;
}

Matrix read_row(const RunConfig& cfg, const std::string& key, Index expected) {
  const Matrix m = read_csv(required_file(cfg, key, "for inpaint"));
  if (m.rows() != 1 || m.cols() != expected)
    throw ShapeError("config key '" + key + "': expected one row of " + std::to_string(expected) + " values, got " +
                     shape_string(m));
  return m.transpose();
}

/// Binary PGM (P5) grid of tiles, values in [0, 1] mapped to 0..255, unused
/// tiles black, no spacing.
void write_pgm_grid(const fs::path& path, const Matrix& samples, Index tile_rows, Index tile_cols, Index grid_cols) {
  const Index n = samples.rows();
  const Index cols = std::max<Index>(1, std::min(grid_cols, n));
  const Index rows = n == 0 ? 1 : (n + cols - 1) / cols;
  const Index width = cols * tile_cols;
  const Index height = rows * tile_rows;
  std::vector<unsigned char> pixels(static_cast<std::size_t>(width * height), 0);
  for (Index s = 0; s < n; ++s) {
    const Index top = (s / cols) * tile_rows;
    const Index left = (s % cols) * tile_cols;
    for (Index r = 0; r < tile_rows; ++r)
      for (Index c = 0; c < tile_cols; ++c) {
        const double v = std::clamp(samples(s, r * tile_cols + c), 0.0, 1.0);
        pixels[static_cast<std::size_t>((top + r) * width + left + c)] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << "P5\n" << width << ' ' << height << "\n255\n";
  f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

std::pair<Index, Index> tile_shape(const RunConfig& cfg, Index d) {
  auto rows = static_cast<Index>(cfg.integer("image_rows"));
  auto cols = static_cast<Index>(cfg.integer("image_cols"));
  if (rows == 0 && cols == 0) {
    const auto side = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(d))));
    if (side * side == d) return {side, side};
    return {1, d};
  }
  if (rows * cols != d)
    throw ParameterError("image_rows x image_cols = " + std::to_string(rows * cols) + " does not match visible size " +
                         std::to_string(d));
  return {rows, cols};
}

void write_samples(const Context& ctx, const std::string& stem, const Matrix& samples, Index d) {
  write_csv(ctx.out_dir / (stem + ".csv"), samples);
  const auto [tr, tc] = tile_shape(ctx.cfg, d);
  write_pgm_grid(ctx.out_dir / (stem + ".pgm"), samples, tr, tc, static_cast<Index>(ctx.cfg.integer("grid_cols")));
  ctx.out << "wrote " << samples.rows() << " samples to " << (ctx.out_dir / (stem + ".csv")).string() << " and "
          << (ctx.out_dir / (stem + ".pgm")).string() << '\n';
}

SampleRun sample_run(const RunConfig& cfg) {
  SampleRun run;
  run.burn_in = static_cast<Index>(cfg.integer("burn_in"));
  run.num_samples = static_cast<Index>(cfg.integer("num_samples"));
  run.thinning = static_cast<Index>(cfg.integer("thinning"));
  run.collect_mean_field = cfg.flag("mean_field");
  return run;
}

int cmd_train(Context& ctx) {
  const Dataset ds = load_dataset(ctx.cfg);
  GsnModel model(model_config(ctx.cfg, ds.dimension()));
  TrainConfig tc;
  tc.learning_rate = ctx.cfg.real("learning_rate");
  tc.momentum = ctx.cfg.real("momentum");
  tc.lr_decay_per_epoch = ctx.cfg.real("lr_decay");
  tc.epochs = static_cast<Index>(ctx.cfg.integer("epochs"));
  tc.minibatch_size = static_cast<Index>(ctx.cfg.integer("minibatch"));
  tc.seed = ctx.cfg.unsigned_integer("seed");
  const TrainReport report = train(model, ds.examples, tc);

  save_checkpoint(model, ctx.out_dir / "model.ckpt");
  std::ofstream csv(ctx.out_dir / "train_report.csv");
  report.write_csv(csv);
  write_text(ctx.out_dir / "checksum.txt", hex64(report.checksum) + "\n");
  if (!report.epochs.empty())
    ctx.out << "final mean walkback NLL " << report.epochs.back().mean_nll << " after " << report.epochs.size()
            << " epochs (" << std::fixed << std::setprecision(2) << report.wall_seconds << " s)\n"
            << std::defaultfloat;
  ctx.out << "checksum " << hex64(report.checksum) << '\n';
  return 0;
}

int cmd_sample(Context& ctx) {
  const GsnModel model = load_checkpoint(required_file(ctx.cfg, "checkpoint", "for sample"));
  Rng rng(ctx.cfg.unsigned_integer("seed"));
  const Matrix samples = stack_rows(sample(model, sample_run(ctx.cfg), rng));
  write_samples(ctx, "samples", samples, model.config().visible_size);
  return 0;
}

int cmd_inpaint(Context& ctx) {
  const GsnModel model = load_checkpoint(required_file(ctx.cfg, "checkpoint", "for inpaint"));
  const Index d = model.config().visible_size;
  const Matrix mask = read_row(ctx.cfg, "clamp_mask", d);
  SampleRun run = sample_run(ctx.cfg);
  std::vector<bool> flags(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) flags[static_cast<std::size_t>(i)] = mask(i) != 0.0;
  run.clamp_mask = flags;
  run.clamp_values = read_row(ctx.cfg, "clamp_values", d);
  Rng rng(ctx.cfg.unsigned_integer("seed"));
  const Matrix samples = stack_rows(sample_clamped(model, run, rng));
  write_samples(ctx, "inpaint", samples, d);
  return 0;
}

int cmd_eval_parzen(Context& ctx) {
  const Matrix samples = read_csv(required_file(ctx.cfg, "samples_path", "for eval-parzen"));
  const Dataset ds = load_dataset(ctx.cfg);
  if (samples.cols() != ds.dimension())
    throw ShapeError("samples have " + std::to_string(samples.cols()) + " columns, test data " +
                     std::to_string(ds.dimension()));

  double sigma = ctx.cfg.real("parzen_sigma");
  Matrix test = ds.examples;
  if (sigma <= 0.0) {
    const auto valid_rows = static_cast<Index>(std::floor(ctx.cfg.real("parzen_valid_fraction") * static_cast<double>(ds.size())));
    if (valid_rows < 1 || valid_rows >= ds.size())
      throw ParameterError("parzen_valid_fraction leaves no validation or no test examples");
    const Matrix valid = ds.examples.topRows(valid_rows);
    test = ds.examples.bottomRows(ds.size() - valid_rows).eval();
    const auto grid = log_spaced(ctx.cfg.real("parzen_grid_lo"), ctx.cfg.real("parzen_grid_hi"),
                                 static_cast<Index>(ctx.cfg.integer("parzen_grid_count")));
    sigma = select_bandwidth(samples, valid, grid);
  }
  const LogLikelihood ll = log_likelihood(ParzenEstimator(samples, sigma), test);
  ctx.out << std::setprecision(6) << "parzen log-likelihood " << ll.mean << " +- " << ll.std_error << " (sigma " << sigma
          << ", " << test.rows() << " test points, " << samples.rows() << " samples)\n";
  std::ofstream f(ctx.out_dir / "parzen.csv");
  f.precision(17);
  f << "sigma,mean,std_error,test_points,samples\n"
    << sigma << ',' << ll.mean << ',' << ll.std_error << ',' << test.rows() << ',' << samples.rows() << '\n';
  return 0;
}

int cmd_analyze_chain(Context& ctx) {
  const std::string& kind = ctx.cfg.get("chain");
  ChainOperator op;
  std::optional<RowVector> reference;
  if (kind == "dae") {
    const GsnModel model = load_checkpoint(required_file(ctx.cfg, "checkpoint", "for analyze-chain with chain = dae"));
    op = dae_exact_operator(model, StateSpace(model.config().visible_size));
    if (ctx.cfg.get("data_source") == "toy" && ctx.cfg.get("toy_kind") == "bit-patterns" &&
        ctx.cfg.integer("toy_bits") == model.config().visible_size)
      reference = default_bit_table(model.config().visible_size);
  } else if (kind == "depnet-consistent") {
    op = depnet_operator(conditionals_from_joint(reference_joint(), 2));
    reference = reference_joint();
  } else if (kind == "depnet-inconsistent") {
    op = depnet_operator(inconsistent_depnet());
  } else if (kind == "depnet-ordered") {
    const auto d = static_cast<Index>(ctx.cfg.integer("depnet_variables"));
    Rng rng(ctx.cfg.unsigned_integer("seed"));
    RowVector joint(Index{1} << d);
    for (Index s = 0; s < joint.size(); ++s) joint(s) = 0.1 + rng.uniform();
    op = depnet_operator(conditionals_from_joint(joint / joint.sum(), d, ScanMode::OrderedWithIndex));
  } else {
    throw ParameterError("config key 'chain' expects dae, depnet-consistent, depnet-inconsistent or depnet-ordered, got '" +
                         kind + "'");
  }

  const ErgodicityReport erg = ergodicity_check(op);
  nlohmann::json report{{"chain", op.label},
                        {"states", op.size()},
                        {"irreducible", erg.irreducible},
                        {"period", erg.period},
                        {"ergodic", erg.ergodic}};
  ctx.out << op.label << ": " << op.size() << " states, irreducible " << (erg.irreducible ? "yes" : "no") << ", period "
          << erg.period << ", ergodic " << (erg.ergodic ? "yes" : "no") << '\n';
  write_csv(ctx.out_dir / "operator.csv", op.k);
  if (erg.irreducible) {
    StationaryOptions opts;
    opts.dense_fallback = true;
    const RowVector pi = stationary_distribution(op.k, opts);
    write_csv(ctx.out_dir / "stationary.csv", Matrix(pi));
    report["stationary"] = std::vector<double>(pi.data(), pi.data() + pi.size());
    if (reference && reference->size() == pi.size()) {
      const double tv = 0.5 * (pi - *reference).lpNorm<1>();
      report["tv_to_reference"] = tv;
      ctx.out << "total variation to the reference table " << tv << '\n';
    }
  }
  write_text(ctx.out_dir / "analysis.json", report.dump(2) + "\n");
  return 0;
}

int cmd_verify(Context& ctx) {
  const std::uint64_t seed = ctx.cfg.unsigned_integer("seed");
  const std::string& conv = ctx.cfg.get("norm_convention");
  if (conv != "row" && conv != "column")
    throw ParameterError("config key 'norm_convention' expects row or column, got '" + conv + "'");

  std::vector<BatteryResult> batteries;
  batteries.push_back(stationarity_battery(static_cast<Index>(ctx.cfg.integer("stationarity_trials")), seed));
  batteries.push_back(perturbation_battery(static_cast<Index>(ctx.cfg.integer("perturbation_trials")), seed,
                                           static_cast<Index>(ctx.cfg.integer("perturbation_max_states")),
                                           conv == "row" ? NormConvention::RowStochastic : NormConvention::ColumnInfinity));
  batteries.push_back(depnet_battery(seed, static_cast<Index>(ctx.cfg.integer("depnet_variables"))));
  batteries.push_back(ergodicity_battery(ctx.cfg.flag("inject_counterexample")));

  std::vector<TrialRow> rows;
  bool all = true;
  for (const auto& b : batteries) {
    const bool ok = b.passed();
    all = all && ok;
    Index failed = 0;
    for (const auto& r : b.rows) failed += r.holds ? 0 : 1;
    ctx.out << (ok ? "PASS " : "FAIL ") << b.name << ": " << b.claim << " (" << b.rows.size() << " rows, " << failed
            << " failed)\n";
    rows.insert(rows.end(), b.rows.begin(), b.rows.end());
  }
  std::ofstream csv(ctx.out_dir / "verify.csv");
  write_rows_csv(csv, rows);
  std::ofstream jsonl(ctx.out_dir / "verify.jsonl");
  write_rows_jsonl(jsonl, rows);
  ctx.out << (all ? "all properties hold" : "verification FAILED") << '\n';
  return all ? 0 : 1;
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<long long> epochs;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config, "flat key=value config file");
  sub->add_option("--seed", o.seed, "master seed (overrides the config)");
  sub->add_option("--out", o.out, "output directory (overrides the config)");
  sub->add_option("--set", o.sets, "override one setting, key=value; repeatable");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative stochastic networks: training, sampling and exact chain analysis", "gsn"};
  app.require_subcommand(1);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print every config key with its default and exit");

  CommonOptions opts;
  using Command = std::function<int(Context&)>;
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](const char* name, const char* help, Command fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, opts);
    commands.emplace_back(sub, std::move(fn));
    return sub;
  };
  CLI::App* train_cmd = add("train", "train a model and write its checkpoint and per-epoch report", cmd_train);
  train_cmd->add_option("--epochs", opts.epochs, "training epochs (overrides the config)");
  add("sample", "run the chain of a checkpoint and write samples as CSV and a PGM grid", cmd_sample);
  add("inpaint", "sample with clamped visible coordinates", cmd_inpaint);
  add("eval-parzen", "Parzen log-likelihood of test data under generated samples", cmd_eval_parzen);
  add("analyze-chain", "exact transition operator, ergodicity and stationary distribution", cmd_analyze_chain);
  add("verify", "run the exact verification batteries and write CSV and JSON-lines reports", cmd_verify);

  // --list-keys works without a subcommand.
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--list-keys") {
      for (const auto& k : known_keys())
        out << std::left << std::setw(26) << k.name << std::setw(14) << (k.default_value.empty() ? "(none)" : k.default_value)
            << k.help << '\n';
      return 0;
    }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (auto& [sub, fn] : commands) {
    if (!sub->parsed()) continue;
    try {
      Context ctx{RunConfig{}, {}, out, err};
      if (!opts.config.empty()) {
        ctx.cfg.load_file(opts.config);
        const fs::path base = fs::path(opts.config).parent_path();
        for (const auto& k : known_keys())
          if (is_path_key(k.name) && ctx.cfg.has_value(k.name) && fs::path(ctx.cfg.get(k.name)).is_relative())
            ctx.cfg.set(k.name, (base / ctx.cfg.get(k.name)).lexically_normal().string());
      }
      for (const auto& s : opts.sets) ctx.cfg.set_assignment(s);
      if (opts.seed) ctx.cfg.set("seed", std::to_string(*opts.seed));
      if (opts.out) ctx.cfg.set("out", *opts.out);
      if (opts.epochs) ctx.cfg.set("epochs", std::to_string(*opts.epochs));

      ctx.out_dir = ctx.cfg.get("out");
      fs::create_directories(ctx.out_dir);
      const std::string resolved = ctx.cfg.resolved();
      err << "gsn " << sub->get_name() << " resolved config:\n" << resolved;
      write_text(ctx.out_dir / "config.resolved", "# gsn " + sub->get_name() + "\n" + resolved);
      return fn(ctx);
    } catch (const std::exception& e) {
      err << "gsn " << sub->get_name() << ": error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

}  // namespace gsn::cli
