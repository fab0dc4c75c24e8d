#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ampci/amp.hpp"
#include "ampci/channel.hpp"
#include "ampci/denoisers.hpp"
#include "ampci/image_io.hpp"
#include "ampci/metrics.hpp"
#include "ampci/patch.hpp"
#include "ampci/rng.hpp"
#include "ampci/wavelet.hpp"

namespace ampci {

inline constexpr const char* kCsvHeader = "image,denoiser,M,N,iter,nmse_db,sigma2_hat,elapsed_ms";
inline constexpr const char* kSummaryId = "MEAN";

struct ExperimentConfig {
  std::filesystem::path corpus;
  ExtractionMethod method = ExtractionMethod::method1;
  // Exactly one of these is set.
  std::optional<std::size_t> measurements;
  std::optional<double> rate;
  DenoiserSpec denoiser{};
  int iterations = 30;
  std::optional<double> damping;  // unset: default_damping(denoiser.kind)
  int levels = kDefaultWaveletLevels;
  std::uint64_t matrix_seed = 1;
  std::uint64_t noise_seed = 2;
  double noise_std = 0.0;  // measurement noise; 0 is the noiseless protocol
  unsigned threads = 1;
  // Wall-clock timings make output non-reproducible, so they are opt-in.
  bool record_time = false;
  std::optional<std::filesystem::path> dump_dir;

  double effective_damping() const { return damping.value_or(default_damping(denoiser.kind)); }

  std::size_t measurement_count(std::size_t n) const {
    if (measurements.has_value() == rate.has_value())
      throw std::invalid_argument("ExperimentConfig: specify exactly one of measurements or rate");
    if (measurements) {
      if (*measurements == 0) throw std::invalid_argument("ExperimentConfig: measurements must be positive");
      return *measurements;
    }
    if (!(*rate > 0.0 && *rate <= 1.0)) throw std::invalid_argument("ExperimentConfig: rate must lie in (0,1]");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(*rate * static_cast<double>(n))));
  }

  AmpConfig amp_config(std::size_t rows, std::size_t cols) const {
    AmpConfig a;
    a.iterations = iterations;
    a.damping = effective_damping();
    a.denoiser = denoiser;
    a.wavelet_levels = levels;
    a.seed = matrix_seed;
    a.image_rows = rows;
    a.image_cols = cols;
    return a;
  }
};

struct ResultRow {
  std::string image;
  std::string denoiser;
  std::size_t m = 0;
  std::size_t n = 0;
  int iter = 0;
  double nmse_db = 0.0;
  double sigma2_hat = 0.0;
  std::optional<double> elapsed_ms;
};

struct CorpusItem {
  std::string id;
  ImagePlane image;
};

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trip decimal form; independent of locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool header = true) {
  if (header) out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.image << ',' << r.denoiser << ',' << r.m << ',' << r.n << ',' << r.iter << ',' << format_double(r.nmse_db)
        << ',' << format_double(r.sigma2_hat) << ',';
    if (r.elapsed_ms) out << format_double(*r.elapsed_ms);
    out << '\n';
  }
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

// ---------------------------------------------------------------------------
// Corpus handling

using WarningSink = std::function<void(const std::string&)>;

inline void default_warning(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

/// Extracts the patch and crops to the wavelet block size.
inline ImagePlane prepare_image(const ImagePlane& raw, ExtractionMethod method, int levels) {
  return crop_to_multiple(extract_patch(raw, method), std::size_t{1} << levels);
}

/// Loads every regular file in `dir` (sorted by name). Unreadable files and
/// files whose prepared shape differs from the first image are skipped with
/// a warning.
inline std::vector<CorpusItem> load_corpus(const std::filesystem::path& dir, ExtractionMethod method, int levels,
                                           const WarningSink& warn = default_warning) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("corpus directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename().string().front() != '.') files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<CorpusItem> items;
  for (const auto& f : files) {
    try {
      ImagePlane img = prepare_image(load_image(f), method, levels);
      if (!items.empty() && (img.rows != items.front().image.rows || img.cols != items.front().image.cols)) {
        warn("skipping " + f.string() + ": prepared size " + std::to_string(img.rows) + "x" +
             std::to_string(img.cols) + " differs from corpus size");
        continue;
      }
      if (energy(img.view()) == 0.0) {
        warn("skipping " + f.string() + ": all-zero image");
        continue;
      }
      items.push_back({f.stem().string(), std::move(img)});
    } catch (const std::exception& ex) {
      warn("skipping " + f.string() + ": " + ex.what());
    }
  }
  if (items.empty()) throw std::runtime_error("corpus is empty: " + dir.string());
  return items;
}

/// Runs fn(i) for i in [0, count) on `threads` workers. The first exception
/// is rethrown after all workers finish.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.image != b.image ? a.image < b.image : a.iter < b.iter;
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

/// AMP reconstruction of every corpus item against one shared system.
/// Detail rows sorted by (image, iter), then one summary row.
inline std::vector<ResultRow> run_corpus(const ExperimentConfig& config, const std::vector<CorpusItem>& items,
                                         const MeasurementSystem& system) {
  if (items.empty()) throw std::invalid_argument("run_corpus: empty corpus");
  const std::size_t rows_px = items.front().image.rows, cols_px = items.front().image.cols;
  if (rows_px * cols_px != system.n) throw std::invalid_argument("run_corpus: image size does not match system n");
  const AmpConfig amp = config.amp_config(rows_px, cols_px);
  amp.validate();
  const std::string label = config.denoiser.label();

  std::vector<ReconstructionReport> reports(items.size());
  parallel_for(items.size(), config.threads, [&](std::size_t i) {
    const auto& item = items[i];
    const Eigen::VectorXd y = measure(system, item.image.view(), mix_seed(config.noise_seed, i));
    reports[i] = reconstruct(system, y, amp, &item.image);
  });

  std::vector<ResultRow> rows;
  std::vector<double> final_nmse, final_sigma, total_ms;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& rep = reports[i];
    double cumulative = 0.0;
    for (const auto& h : rep.history) {
      cumulative += h.elapsed_ms;
      ResultRow row{items[i].id, label, system.m, system.n, h.t, h.nmse_db, h.sigma2_hat, std::nullopt};
      if (config.record_time) row.elapsed_ms = cumulative;
      rows.push_back(std::move(row));
    }
    final_nmse.push_back(rep.history.back().nmse_db);
    final_sigma.push_back(rep.history.back().sigma2_hat);
    total_ms.push_back(rep.total_ms);
    if (config.dump_dir) {
      std::filesystem::create_directories(*config.dump_dir);
      save_pgm(rep.estimate, *config.dump_dir / (items[i].id + "_" + label + "_M" + std::to_string(system.m) + ".pgm"));
    }
  }
  detail::sort_rows(rows);
  ResultRow summary{kSummaryId,         label, system.m, system.n, config.iterations, detail::mean_of(final_nmse),
                    detail::mean_of(final_sigma), std::nullopt};
  if (config.record_time) summary.elapsed_ms = detail::mean_of(total_ms);
  rows.push_back(std::move(summary));
  return rows;
}

inline std::vector<ResultRow> run_corpus(const ExperimentConfig& config, const std::vector<CorpusItem>& items) {
  const std::size_t n = items.front().image.size();
  const MeasurementSystem system = generate_matrix(config.measurement_count(n), n, config.matrix_seed, config.noise_std);
  return run_corpus(config, items, system);
}

inline std::vector<ResultRow> run_corpus(const ExperimentConfig& config) {
  return run_corpus(config, load_corpus(config.corpus, config.method, config.levels));
}

/// run_corpus at M = round(R N) for each rate, one block per rate.
inline std::vector<ResultRow> sweep_rate(const ExperimentConfig& config, const std::vector<CorpusItem>& items,
                                         const std::vector<double>& rates) {
  if (rates.empty()) throw std::invalid_argument("sweep_rate: no rates given");
  for (double r : rates)
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("sweep_rate: rate " + format_double(r) + " outside (0,1]");
  std::vector<ResultRow> rows;
  for (double r : rates) {
    ExperimentConfig c = config;
    c.measurements.reset();
    c.rate = r;
    auto block = run_corpus(c, items);
    rows.insert(rows.end(), std::make_move_iterator(block.begin()), std::make_move_iterator(block.end()));
  }
  return rows;
}

inline std::vector<ResultRow> sweep_rate(const ExperimentConfig& config, const std::vector<double>& rates) {
  return sweep_rate(config, load_corpus(config.corpus, config.method, config.levels), rates);
}

/// Wavelet-domain denoising of each image observed through the scalar
/// channel q = x + v, v ~ N(0, variance). All denoisers see the same noise
/// draw for a given (image, variance). Rows use M = 0, iter = 1 and carry the
/// channel variance in sigma2_hat.
inline std::vector<ResultRow> denoiser_bench(const ExperimentConfig& config, const std::vector<CorpusItem>& items,
                                             const std::vector<double>& variances,
                                             const std::vector<DenoiserSpec>& denoisers) {
  if (items.empty()) throw std::invalid_argument("denoiser_bench: empty corpus");
  for (double v : variances)
    if (v < 0.0) throw std::invalid_argument("denoiser_bench: negative variance");
  const std::size_t rows_px = items.front().image.rows, cols_px = items.front().image.cols;

  std::vector<ResultRow> rows;
  for (std::size_t vi = 0; vi < variances.size(); ++vi) {
    const double var = variances[vi];
    // nmse[d][i], ms[d][i]
    std::vector<std::vector<double>> nmse(denoisers.size(), std::vector<double>(items.size()));
    std::vector<std::vector<double>> ms = nmse;
    parallel_for(items.size(), config.threads, [&](std::size_t i) {
      const auto& x = items[i].image;
      const auto q = scalar_channel(x.view(), std::sqrt(var), mix_seed(config.noise_seed, vi * items.size() + i));
      CoeffPlane theta(rows_px, cols_px, config.levels, q);
      haar_forward_inplace(theta.coeffs, rows_px, cols_px, config.levels);
      for (std::size_t d = 0; d < denoisers.size(); ++d) {
        const auto start = std::chrono::steady_clock::now();
        DenoiseResult res = denoise(theta, var, denoisers[d]);
        haar_inverse_inplace(res.denoised.coeffs, rows_px, cols_px, config.levels);
        ms[d][i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        nmse[d][i] = nmse_db(x.view(), res.denoised.coeffs);
      }
    });
    for (std::size_t d = 0; d < denoisers.size(); ++d) {
      const std::string label = denoisers[d].label();
      std::vector<ResultRow> block;
      for (std::size_t i = 0; i < items.size(); ++i) {
        ResultRow row{items[i].id, label, 0, rows_px * cols_px, 1, nmse[d][i], var, std::nullopt};
        if (config.record_time) row.elapsed_ms = ms[d][i];
        block.push_back(std::move(row));
      }
      detail::sort_rows(block);
      ResultRow summary{kSummaryId, label, 0, rows_px * cols_px, 1, detail::mean_of(nmse[d]), var, std::nullopt};
      if (config.record_time) summary.elapsed_ms = detail::mean_of(ms[d]);
      block.push_back(std::move(summary));
      rows.insert(rows.end(), block.begin(), block.end());
    }
  }
  return rows;
}

/// Summary rows only.
inline std::vector<ResultRow> summary_rows(const std::vector<ResultRow>& rows) {
  std::vector<ResultRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [](const ResultRow& r) { return r.image == kSummaryId; });
  return out;
}

}  // namespace ampci
