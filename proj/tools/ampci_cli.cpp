// Command-line front end: single-image reconstruction, corpus runs, rate
// sweeps, the scalar-channel denoiser benchmark and the state-evolution
// oracle. All output is CSV.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ampci/ampci.hpp"

namespace {

using namespace ampci;

struct CommonOptions {
  std::string method = "1";
  std::optional<std::size_t> measurements;
  std::optional<double> rate;
  std::vector<std::string> denoisers{"wiener"};
  std::string mask = "weighted5";
  double threshold_scale = 1.0;
  bool pass_approximation = false;
  std::string wiener_derivative = "exact";
  int iters = 30;
  std::optional<double> damping;
  int levels = kDefaultWaveletLevels;
  std::uint64_t seed = 1;
  double noise_std = 0.0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out;
  bool timing = false;
};

void add_measurement_options(CLI::App* cmd, CommonOptions& o, bool rate_required = true) {
  auto* m = cmd->add_option("--measurements,-M", o.measurements, "Measurement count M");
  auto* r = cmd->add_option("--rate,-R", o.rate, "Measurement rate R = M/N")->check(CLI::Range(0.0, 1.0));
  m->excludes(r);
  r->excludes(m);
  if (rate_required) cmd->callback([m, r] {
      if (m->count() == 0 && r->count() == 0) throw CLI::RequiredError("--measurements or --rate");
    });
}

void add_amp_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--method", o.method, "Patch extraction: 1 (192->128 resize), 2 (192 crop), none")
      ->check(CLI::IsMember({"1", "2", "none"}));
  cmd->add_option("--denoiser", o.denoisers, "Denoiser(s): abe, wiener, soft, hard (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember({"abe", "wiener", "soft", "hard"}));
  cmd->add_option("--mask", o.mask, "Wiener neighbourhood mask")->check(CLI::IsMember({"ones3", "ones5", "weighted5"}));
  cmd->add_option("--threshold-scale", o.threshold_scale, "soft/hard threshold in units of the noise std")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--pass-approximation", o.pass_approximation, "Leave the coarsest approximation band undenoised");
  cmd->add_option("--wiener-derivative", o.wiener_derivative,
                  "Onsager derivative of the Wiener filter: exact, or shrinkage (factor only)")
      ->check(CLI::IsMember({"exact", "shrinkage"}));
  cmd->add_option("--iters", o.iters, "AMP iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--damping", o.damping, "Damping lambda in [0,1) (default: 0.1 for wiener, 0 otherwise)")
      ->check(CLI::Range(0.0, 0.999999999));
  cmd->add_option("--levels", o.levels, "Haar decomposition depth")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base RNG seed");
  cmd->add_option("--noise-std", o.noise_std, "Measurement noise std (0 = noiseless)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output CSV (default stdout)");
  cmd->add_flag("--timing", o.timing, "Fill elapsed_ms with wall-clock times (output no longer reproducible)");
}

DenoiserSpec make_spec(const CommonOptions& o, const std::string& name) {
  DenoiserSpec s;
  s.kind = denoiser_kind_from_name(name);
  s.mask = o.mask;
  s.threshold_scale = o.threshold_scale;
  s.pass_approximation = o.pass_approximation;
  s.wiener_derivative = o.wiener_derivative == "shrinkage" ? WienerDerivative::shrinkage : WienerDerivative::exact;
  return s;
}

ExperimentConfig make_config(const CommonOptions& o) {
  ExperimentConfig c;
  c.method = extraction_method_from_name(o.method);
  c.measurements = o.measurements;
  c.rate = o.rate;
  c.iterations = o.iters;
  c.damping = o.damping;
  c.levels = o.levels;
  c.matrix_seed = o.seed;
  c.noise_seed = mix_seed(o.seed, 1);
  c.noise_std = o.noise_std;
  c.threads = o.threads;
  c.record_time = o.timing;
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void append(std::vector<ResultRow>& dst, std::vector<ResultRow> src) {
  dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive imaging by approximate message passing with wavelet-domain denoisers"};
  app.require_subcommand(1);

  // reconstruct ------------------------------------------------------------
  CommonOptions rec_opts;
  std::string rec_input, rec_dump, save_matrix, load_matrix;
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct a single image");
  rec->add_option("--input,-i", rec_input, "PGM/PNG image")->required()->check(CLI::ExistingFile);
  rec->add_option("--dump", rec_dump, "Write the final estimate as PGM");
  rec->add_option("--save-matrix", save_matrix, "Store the sensing matrix in binary form");
  rec->add_option("--load-matrix", load_matrix, "Reuse a stored sensing matrix")->check(CLI::ExistingFile);
  add_amp_options(rec, rec_opts);
  add_measurement_options(rec, rec_opts, false);

  // corpus -------------------------------------------------------------------
  CommonOptions cor_opts;
  std::string cor_dir, cor_dump;
  auto* cor = app.add_subcommand("corpus", "Reconstruct every image of a corpus");
  cor->add_option("--corpus", cor_dir, "Directory of grayscale images")->required()->check(CLI::ExistingDirectory);
  cor->add_option("--dump-dir", cor_dump, "Write final estimates as PGM into this directory");
  add_amp_options(cor, cor_opts);
  add_measurement_options(cor, cor_opts);

  // sweep-rate ---------------------------------------------------------------
  CommonOptions sw_opts;
  std::string sw_dir;
  std::vector<double> sw_rates{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  auto* sw = app.add_subcommand("sweep-rate", "Corpus NMSE as a function of the measurement rate");
  sw->add_option("--corpus", sw_dir, "Directory of grayscale images")->required()->check(CLI::ExistingDirectory);
  sw->add_option("--rates", sw_rates, "Comma-separated rates in (0,1]")->delimiter(',');
  add_amp_options(sw, sw_opts);

  // denoise-bench ------------------------------------------------------------
  CommonOptions db_opts;
  db_opts.method = "2";
  db_opts.denoisers = {"abe", "wiener"};
  std::string db_dir;
  std::vector<double> db_vars{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  auto* db = app.add_subcommand("denoise-bench", "Scalar-channel denoiser comparison");
  db->add_option("--corpus", db_dir, "Directory of grayscale images")->required()->check(CLI::ExistingDirectory);
  db->add_option("--variances", db_vars, "Comma-separated noise variances")->delimiter(',');
  add_amp_options(db, db_opts);

  // se-oracle ----------------------------------------------------------------
  std::string se_prior = "bg", se_denoiser = "soft", se_out, se_input;
  double se_sparsity = 0.1, se_amplitude = 1.0, se_rate = 0.5, se_noise_var = 0.0, se_threshold = 1.0;
  int se_iters = 10, se_levels = kDefaultWaveletLevels;
  std::size_t se_samples = 200000;
  std::uint64_t se_seed = 1;
  auto* se = app.add_subcommand("se-oracle", "Monte Carlo state evolution");
  se->add_option("--prior", se_prior, "bg (Bernoulli-Gaussian), two-point, or empirical")
      ->check(CLI::IsMember({"bg", "two-point", "empirical"}));
  se->add_option("--sparsity", se_sparsity, "Fraction of non-zero entries")->check(CLI::Range(0.0, 1.0));
  se->add_option("--amplitude", se_amplitude, "Amplitude (std for bg, value for two-point)");
  se->add_option("--input,-i", se_input, "Image whose wavelet coefficients form the empirical prior")
      ->check(CLI::ExistingFile);
  se->add_option("--levels", se_levels, "Haar depth for the empirical prior")->check(CLI::PositiveNumber);
  se->add_option("--rate,-R", se_rate, "Measurement rate R")->check(CLI::PositiveNumber);
  se->add_option("--noise-var", se_noise_var, "Measurement noise variance")->check(CLI::NonNegativeNumber);
  se->add_option("--denoiser", se_denoiser, "soft, hard or abe")->check(CLI::IsMember({"soft", "hard", "abe"}));
  se->add_option("--threshold-scale", se_threshold, "Threshold in units of sigma_t")->check(CLI::NonNegativeNumber);
  se->add_option("--iters", se_iters, "Iterations")->check(CLI::NonNegativeNumber);
  se->add_option("--samples", se_samples, "Monte Carlo samples per iteration")->check(CLI::PositiveNumber);
  se->add_option("--seed", se_seed, "RNG seed");
  se->add_option("--out", se_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*rec) {
      ExperimentConfig cfg = make_config(rec_opts);
      if (rec_opts.denoisers.size() != 1) throw std::invalid_argument("reconstruct takes a single --denoiser");
      cfg.denoiser = make_spec(rec_opts, rec_opts.denoisers.front());
      const ImagePlane x = prepare_image(load_image(rec_input), cfg.method, cfg.levels);
      const std::vector<CorpusItem> items{{std::filesystem::path(rec_input).stem().string(), x}};
      MeasurementSystem system;
      if (!load_matrix.empty()) {
        system = load_system(load_matrix);
        if (system.n != x.size()) throw std::invalid_argument("stored matrix does not match image size");
      } else {
        if (!cfg.measurements && !cfg.rate) throw std::invalid_argument("--measurements or --rate is required");
        system = generate_matrix(cfg.measurement_count(x.size()), x.size(), cfg.matrix_seed, cfg.noise_std);
      }
      if (!save_matrix.empty()) save_system(system, save_matrix);
      if (!rec_dump.empty()) {
        const Eigen::VectorXd y = measure(system, x.view(), mix_seed(cfg.noise_seed, 0));
        save_pgm(reconstruct(system, y, cfg.amp_config(x.rows, x.cols), &x).estimate, rec_dump);
      }
      emit(rec_opts.out, to_csv(run_corpus(cfg, items, system)));
    } else if (*cor) {
      ExperimentConfig cfg = make_config(cor_opts);
      if (!cor_dump.empty()) cfg.dump_dir = cor_dump;
      const auto items = load_corpus(cor_dir, cfg.method, cfg.levels);
      const std::size_t n = items.front().image.size();
      const MeasurementSystem system = generate_matrix(cfg.measurement_count(n), n, cfg.matrix_seed, cfg.noise_std);
      std::vector<ResultRow> rows;
      for (const auto& name : cor_opts.denoisers) {
        cfg.denoiser = make_spec(cor_opts, name);
        append(rows, run_corpus(cfg, items, system));
      }
      emit(cor_opts.out, to_csv(rows));
    } else if (*sw) {
      ExperimentConfig cfg = make_config(sw_opts);
      const auto items = load_corpus(sw_dir, cfg.method, cfg.levels);
      std::vector<ResultRow> rows;
      for (const auto& name : sw_opts.denoisers) {
        cfg.denoiser = make_spec(sw_opts, name);
        append(rows, sweep_rate(cfg, items, sw_rates));
      }
      emit(sw_opts.out, to_csv(rows));
    } else if (*db) {
      ExperimentConfig cfg = make_config(db_opts);
      const auto items = load_corpus(db_dir, cfg.method, cfg.levels);
      std::vector<DenoiserSpec> specs;
      for (const auto& name : db_opts.denoisers) specs.push_back(make_spec(db_opts, name));
      emit(db_opts.out, to_csv(denoiser_bench(cfg, items, db_vars, specs)));
    } else if (*se) {
      SePriorSpec prior;
      prior.sparsity = se_sparsity;
      prior.amplitude = se_amplitude;
      prior.rate = se_rate;
      prior.noise_var = se_noise_var;
      if (se_prior == "bg") {
        prior.kind = SePriorSpec::Kind::bernoulli_gaussian;
      } else if (se_prior == "two-point") {
        prior.kind = SePriorSpec::Kind::two_point;
      } else {
        if (se_input.empty()) throw std::invalid_argument("--prior empirical needs --input");
        prior.kind = SePriorSpec::Kind::empirical;
        const ImagePlane img = crop_to_multiple(load_image(se_input), std::size_t{1} << se_levels);
        prior.values = haar_forward(img, se_levels).coeffs;
      }
      DenoiserSpec spec;
      spec.kind = denoiser_kind_from_name(se_denoiser);
      spec.threshold_scale = se_threshold;
      const auto traj = se_oracle(prior, scalar_denoiser(spec), se_iters, se_samples, se_seed);
      std::string csv = "iter,sigma2,std_error\n";
      for (std::size_t t = 0; t < traj.sigma2.size(); ++t)
        csv += std::to_string(t) + ',' + format_double(traj.sigma2[t]) + ',' + format_double(traj.std_error[t]) + '\n';
      emit(se_out, csv);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
