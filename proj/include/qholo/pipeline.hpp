#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qholo/analysis.hpp"
#include "qholo/config.hpp"
#include "qholo/holography.hpp"
#include "qholo/io.hpp"
#include "qholo/oracle.hpp"
#include "qholo/parallel.hpp"
#include "qholo/spdc.hpp"

namespace qholo {

inline constexpr const char* kToolVersion = "qholo 0.1.0";

namespace pipeline {

namespace fs = std::filesystem;

/// Target selected by cfg.pattern, on the run grid.
inline TargetPattern make_target(const RunConfig& cfg) {
  const Grid2D grid = cfg.grid();
  if (cfg.pattern == "dirac9") return dirac_array_target(3, cfg.dirac_spacing_per_mm, grid);
  if (cfg.pattern == "dirac") return dirac_array_target(cfg.dirac_n, cfg.dirac_spacing_per_mm, grid);
  if (cfg.pattern == "smiley")
    return speckle_image_target(smiley_bitmap(), cfg.smiley_diameter_per_mm,
                                cfg.speckle_grain_per_mm, cfg.speckle_seed, grid);
  if (cfg.pattern == "bitmap") {
    require(!cfg.bitmap_path.empty(), Errc::invalid_argument, "pattern=bitmap needs bitmap_path");
    return speckle_image_target(io::read_bitmap(cfg.bitmap_path), cfg.smiley_diameter_per_mm,
                                cfg.speckle_grain_per_mm, cfg.speckle_seed, grid);
  }
  throw Error(Errc::invalid_argument, "unknown pattern '" + cfg.pattern +
                                          "' (dirac9, dirac, smiley, bitmap, uniform)");
}

inline PhaseHologram make_hologram(const RunConfig& cfg) {
  if (cfg.pattern == "uniform") {
    PhaseHologram h = uniform_hologram(cfg.grid(), cfg.signal_wavelength_mm());
    h.phase_step_rad = cfg.phase_step_rad;
    h.depth_error = cfg.depth_error;
    return h;
  }
  PhaseHologram h = design_offaxis_binary(make_target(cfg), cfg.carrier_x_per_mm, cfg.carrier_y_per_mm,
                                          cfg.phase_step_rad, cfg.signal_wavelength_mm());
  h.depth_error = cfg.depth_error;
  return h;
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Manifest: run header, input hashes, then the canonical config. Only the
/// created_utc line differs between re-runs.
inline void write_manifest(const fs::path& path, const std::string& command, const RunConfig& cfg,
                           const std::vector<std::pair<std::string, fs::path>>& inputs) {
  std::ostringstream os;
  os << "# run manifest\n"
     << "command=" << command << "\n"
     << "created_utc=" << utc_now() << "\n"
     << "tool_version=" << kToolVersion << "\n";
  for (const auto& [name, p] : inputs) os << "input_" << name << "_fnv1a=" << io::file_hash(p) << "\n";
  os << cfg.canonical();
  io::detail::write_file(path, os.str());
}

/// Hologram for a run: loaded from a file when given, else designed.
inline PhaseHologram resolve_hologram(const RunConfig& cfg, const std::optional<fs::path>& file) {
  if (!file) return make_hologram(cfg);
  PhaseHologram h = io::read_hologram(*file);
  require(h.grid == cfg.grid(), Errc::grid_mismatch, "hologram grid differs from the run grid");
  return h;
}

struct DesignOutputs {
  fs::path hologram;
  std::vector<std::string> warnings;
};

inline DesignOutputs cmd_design(const RunConfig& cfg, const fs::path& outdir) {
  fs::create_directories(outdir);
  std::vector<std::string> warnings;
  PhaseHologram h = [&] {
    if (cfg.pattern == "uniform") return make_hologram(cfg);
    TargetPattern t = make_target(cfg);
    warnings = t.warnings;
    PhaseHologram d = design_offaxis_binary(t, cfg.carrier_x_per_mm, cfg.carrier_y_per_mm,
                                            cfg.phase_step_rad, cfg.signal_wavelength_mm());
    d.depth_error = cfg.depth_error;
    return d;
  }();
  const fs::path pbm = outdir / "hologram.pbm";
  io::write_hologram(pbm, h);
  write_manifest(outdir / "design_manifest.txt", "design", cfg, {});
  return {pbm, warnings};
}

struct SimulateOutputs {
  fs::path signal;
  fs::path idler;
  std::uint64_t frames = 0;
};

/// Generates frames [resume_from, cfg.frames) and appends them to the two
/// stacks. Frames are produced in parallel waves and written in index order.
inline SimulateOutputs cmd_simulate(const RunConfig& cfg, const std::optional<fs::path>& hologram_file,
                                    const fs::path& outdir,
                                    std::optional<std::uint64_t> resume_from = std::nullopt) {
  const SimConfig sim = cfg.sim();
  const DetectorParams det = cfg.detector();
  const Grid2D grid = cfg.grid();
  const PhaseHologram holo = resolve_hologram(cfg, hologram_file);
  const ComplexField pump = cfg.pump_field();
  fs::create_directories(outdir);

  std::optional<PairSampler> sampler;
  std::optional<WignerEngine> engine;
  if (sim.engine == EngineKind::pair_sampling) {
    require(sim.defocus_mm == 0.0, Errc::invalid_argument,
            "defocus is only modelled by the wigner engine");
    sampler.emplace(analytic_coincidence_map(pump, holo),
                    PairSamplingParams{sim.mean_pairs_per_frame, sim.eta, sim.background_per_frame});
  } else {
    std::optional<PhaseHologram> h;
    if (cfg.pattern != "uniform" || hologram_file) h = holo;
    engine.emplace(pump, cfg.crystal(), h, sim.defocus_mm, cfg.focal_length_mm, sim.split_steps);
  }

  SimulateOutputs out{outdir / "signal.bfs", outdir / "idler.bfs", 0};
  const auto w = static_cast<std::uint32_t>(grid.nx());
  const auto hgt = static_cast<std::uint32_t>(grid.ny());
  io::StackFile s(out.signal, w, hgt, Arm::signal, resume_from);
  io::StackFile i(out.idler, w, hgt, Arm::idler, resume_from);
  const std::uint64_t start = std::min(s.frames(), i.frames());
  require(s.frames() == i.frames() || resume_from.has_value(), Errc::format_error,
          "signal and idler stacks hold different frame counts");
  if (s.frames() != i.frames()) {
    s.close();
    i.close();
    return cmd_simulate(cfg, hologram_file, outdir, start);
  }

  const unsigned workers = resolve_workers(cfg.workers);
  const std::uint64_t wave = 4ull * workers;
  std::vector<std::optional<FramePair>> buf;
  for (std::uint64_t first = start; first < sim.frames; first += wave) {
    const std::uint64_t n = std::min(wave, sim.frames - first);
    buf.assign(n, std::nullopt);
    parallel_waves(n, workers, [&](std::uint64_t k) {
      const std::uint64_t idx = first + k;
      buf[k] = sampler ? sampler->frame(sim.master_seed, idx) : engine->frames(sim.master_seed, idx, det);
    });
    for (auto& fp : buf) {
      s.append(fp->signal);
      i.append(fp->idler);
    }
  }
  s.close();
  i.close();
  out.frames = sim.frames;

  std::vector<std::pair<std::string, fs::path>> inputs;
  if (hologram_file) inputs.emplace_back("hologram", *hologram_file);
  write_manifest(outdir / "manifest.txt", "simulate", cfg, inputs);
  return out;
}

/// Diffraction-order windows (0 and +-1) used as background exclusions.
inline std::vector<Window> order_windows(const RunConfig& cfg) {
  const double h = cfg.order_half_width_per_mm;
  std::vector<Window> w{Window::box(0.0, 0.0, std::max(h, cfg.peak_window_per_mm))};
  if (cfg.carrier_x_per_mm != 0.0 || cfg.carrier_y_per_mm != 0.0) {
    w.push_back(Window::box(cfg.carrier_x_per_mm, cfg.carrier_y_per_mm, h));
    w.push_back(Window::box(-cfg.carrier_x_per_mm, -cfg.carrier_y_per_mm, h));
  }
  return w;
}

/// Peak significance in a window: (max Z - background level) / background sigma.
inline double window_snr(const CorrelationMap& map, const Window& window,
                         const std::vector<Window>& exclusions) {
  const auto z = map.significance();
  const auto bg = robust_background(background_samples(z, map.domain, exclusions));
  double zmax = -std::numeric_limits<double>::infinity();
  for (auto i : window_indices(z, window)) zmax = std::max(zmax, z.values[i]);
  return bg.sigma > 0.0 ? (zmax - bg.level) / bg.sigma : 0.0;
}

/// Largest |Z| in the domain in units of the robust background sigma.
inline double max_abs_significance(const CorrelationMap& map) {
  const auto z = map.significance();
  const auto idx = window_indices(z, map.domain);
  std::vector<double> all;
  all.reserve(idx.size());
  double m = 0.0;
  for (auto i : idx) {
    all.push_back(z.values[i]);
    m = std::max(m, std::abs(z.values[i]));
  }
  const auto bg = robust_background(all);
  return bg.sigma > 0.0 ? m / bg.sigma : std::numeric_limits<double>::infinity();
}

struct CorrelationStats {
  std::uint64_t frames = 0;
  double mean_signal = 0.0;
  double mean_idler = 0.0;
  double degree = 0.0;
  double sigma_nu_x = std::numeric_limits<double>::quiet_NaN();
  double sigma_nu_y = std::numeric_limits<double>::quiet_NaN();
  double peak_snr = 0.0;
};

struct SchmidtEstimate {
  double v_empirical = std::numeric_limits<double>::quiet_NaN();
  double v_theoretical = 0.0;
};

inline CorrelationStats correlation_stats(const CorrelationMap& map, const RunConfig& cfg) {
  CorrelationStats st;
  st.frames = map.frames;
  st.mean_signal = map.mean_signal;
  st.mean_idler = map.mean_idler;
  st.degree = degree_of_correlation(map);
  const Window peak = Window::box(0.0, 0.0, cfg.peak_window_per_mm);
  st.peak_snr = window_snr(map, peak, order_windows(cfg));
  try {
    const auto w = peak_widths(map, peak);
    st.sigma_nu_x = w.sigma_nu_x;
    st.sigma_nu_y = w.sigma_nu_y;
  } catch (const Error& e) {
    if (e.code() != Errc::low_snr && e.code() != Errc::degenerate_input) throw;
  }
  return st;
}

inline SchmidtEstimate schmidt_estimate(const CorrelationStats& st, const RunConfig& cfg) {
  SchmidtEstimate s;
  const CrystalParams c = cfg.crystal();
  if (std::isfinite(st.sigma_nu_x) && std::isfinite(st.sigma_nu_y))
    s.v_empirical = schmidt_empirical(c.sigma_phi_per_mm, st.sigma_nu_x, st.sigma_nu_y);
  s.v_theoretical = schmidt_theoretical(c, cfg.pump());
  return s;
}

inline void write_stats(const fs::path& p, const CorrelationStats& st) {
  io::write_csv(p, {"frames", "mean_signal", "mean_idler", "degree", "sigma_nu_x", "sigma_nu_y", "peak_snr"},
                {{std::to_string(st.frames), io::csv_number(st.mean_signal), io::csv_number(st.mean_idler),
                  io::csv_number(st.degree), io::csv_number(st.sigma_nu_x), io::csv_number(st.sigma_nu_y),
                  io::csv_number(st.peak_snr)}});
}

inline void write_schmidt(const fs::path& p, const SchmidtEstimate& s) {
  io::write_csv(p, {"V_empirical", "V_theoretical"},
                {{io::csv_number(s.v_empirical), io::csv_number(s.v_theoretical)}});
}

/// Linear and dB PGM views plus a float dump of the coincidence window.
inline void write_map_views(const fs::path& outdir, const std::string& stem, const CorrelationMap& map,
                            double db_floor) {
  const FrequencyImage win = map.coincidence_window();
  io::write_pgm16(outdir / (stem + "_linear.pgm"), win, io::PgmScale::linear);
  double vmax = 0.0;
  for (double v : win.values) vmax = std::max(vmax, v);
  if (vmax > 0.0)
    io::write_pgm16(outdir / (stem + "_db.pgm"), to_decibels(win, db_floor), io::PgmScale::decibel, db_floor);
  io::write_pf32(outdir / (stem + ".f32"), win);
}

struct AnalyzeResult {
  CorrelationMap map;
  std::optional<CorrelationMap> shuffled;
  CorrelationStats stats;
  SchmidtEstimate schmidt;
};

/// Streams both stacks once; memory stays O(grid + one chunk of frames).
inline AnalyzeResult analyze_stacks(const RunConfig& cfg, const fs::path& signal, const fs::path& idler,
                                    bool shuffle) {
  require(fs::exists(signal), Errc::io_error, "missing signal stack " + signal.string());
  require(fs::exists(idler), Errc::io_error, "missing idler stack " + idler.string());
  io::StackFileReader rs(signal), ri(idler);
  const auto& hs = rs.header();
  const auto& hi = ri.header();
  require(hs.width == hi.width && hs.height == hi.height, Errc::grid_mismatch,
          "signal and idler stacks have different frame sizes");
  require(hs.frames == hi.frames, Errc::invalid_argument,
          "signal and idler stacks hold different frame counts");
  require(hs.arm == Arm::signal && hi.arm == Arm::idler, Errc::invalid_argument,
          "stack arm tags are not signal/idler");
  const Grid2D grid = cfg.grid();
  require(hs.width == grid.nx() && hs.height == grid.ny(), Errc::grid_mismatch,
          "stack frame size differs from the configured grid");

  const double dnx = grid.dnu_x(), dny = grid.dnu_y();
  PhotonCorrelationAccumulator total(hs.width, hs.height, dnx, dny);
  std::optional<ShuffledStream> shuffled;
  if (shuffle) shuffled.emplace(hs.width, hs.height, dnx, dny);

  const unsigned workers = resolve_workers(cfg.workers);
  const std::size_t chunk = 64 * workers;
  std::vector<PhotonFrame> fs_(chunk), fi_(chunk);
  for (;;) {
    std::size_t n = 0;
    while (n < chunk && rs.next(fs_[n])) {
      require(ri.next(fi_[n]), Errc::format_error, "idler stack ended early");
      if (shuffled) shuffled->add(fs_[n], fi_[n]);
      ++n;
    }
    if (n == 0) break;
    auto part = block_reduce<PhotonCorrelationAccumulator>(
        n, (n + workers - 1) / workers, workers,
        [&] { return PhotonCorrelationAccumulator(hs.width, hs.height, dnx, dny); },
        [&](PhotonCorrelationAccumulator& acc, std::uint64_t b, std::uint64_t e) {
          for (auto k = b; k < e; ++k) acc.add(fs_[k], fi_[k]);
        });
    total.merge(part);
  }

  AnalyzeResult r{total.finish(), std::nullopt, {}, {}};
  if (shuffled) r.shuffled = shuffled->finish();
  r.stats = correlation_stats(r.map, cfg);
  r.schmidt = schmidt_estimate(r.stats, cfg);
  return r;
}

inline AnalyzeResult cmd_analyze(const RunConfig& cfg, const fs::path& signal, const fs::path& idler,
                                 const fs::path& outdir, bool shuffle) {
  AnalyzeResult r = analyze_stacks(cfg, signal, idler, shuffle);
  fs::create_directories(outdir);
  write_stats(outdir / "stats.csv", r.stats);
  write_schmidt(outdir / "schmidt.csv", r.schmidt);
  write_map_views(outdir, "map", r.map, cfg.db_floor);
  if (r.shuffled) {
    write_map_views(outdir, "shuffled_map", *r.shuffled, cfg.db_floor);
    const double ratio = max_abs_significance(*r.shuffled);
    io::write_csv(outdir / "shuffled_stats.csv", {"frames", "degree", "max_abs_z_over_sigma"},
                  {{std::to_string(r.shuffled->frames), io::csv_number(degree_of_correlation(*r.shuffled)),
                    io::csv_number(ratio)}});
  }
  write_manifest(outdir / "analyze_manifest.txt", "analyze", cfg, {{"signal", signal}, {"idler", idler}});
  return r;
}

struct OracleOutputs {
  OracleMap map;
  std::optional<MapComparison> comparison;
};

/// Writes the analytic map; with `compare` (a PF32 map from analyze) also
/// writes pearson / l2_rel over the coincidence window.
inline OracleOutputs cmd_oracle(const RunConfig& cfg, const std::optional<fs::path>& hologram_file,
                                const fs::path& outdir, const std::optional<fs::path>& compare) {
  const PhaseHologram holo = resolve_hologram(cfg, hologram_file);
  OracleOutputs out{analytic_coincidence_map(cfg.pump_field(), holo), std::nullopt};
  fs::create_directories(outdir);
  io::write_pgm16(outdir / "oracle_linear.pgm", out.map, io::PgmScale::linear);
  io::write_pgm16(outdir / "oracle_db.pgm", to_decibels(out.map, cfg.db_floor), io::PgmScale::decibel,
                  cfg.db_floor);
  io::write_pf32(outdir / "oracle.f32", out.map);
  if (compare) {
    const FrequencyImage other = io::read_pf32(*compare);
    out.comparison = compare_maps(other, out.map);
    io::write_csv(outdir / "compare.csv", {"pearson", "l2_rel"},
                  {{io::csv_number(out.comparison->pearson), io::csv_number(out.comparison->l2_rel)}});
  }
  std::vector<std::pair<std::string, fs::path>> inputs;
  if (hologram_file) inputs.emplace_back("hologram", *hologram_file);
  if (compare) inputs.emplace_back("compare", *compare);
  write_manifest(outdir / "oracle_manifest.txt", "oracle", cfg, inputs);
  return out;
}

/// Collects the CSV outputs found in the given directories into one table.
inline std::string cmd_report(const std::vector<fs::path>& dirs, const std::optional<fs::path>& out_file) {
  std::ostringstream os;
  os << "run,file,key,value\n";
  for (const auto& d : dirs) {
    require(fs::is_directory(d), Errc::io_error, "not a run directory: " + d.string());
    bool any = false;
    for (const char* name : {"stats.csv", "schmidt.csv", "shuffled_stats.csv", "compare.csv"}) {
      const fs::path p = d / name;
      if (!fs::exists(p)) continue;
      any = true;
      for (const auto& [k, v] : io::read_csv_row(p)) os << d.string() << "," << name << "," << k << "," << v << "\n";
    }
    require(any, Errc::io_error, "no result CSVs in " + d.string());
  }
  if (out_file) io::detail::write_file(*out_file, os.str());
  return os.str();
}

/// Thresholds grayscale camera frames (8/16-bit PGM) into a BFS1 stack.
inline std::uint64_t cmd_ingest(const std::vector<fs::path>& frames, double threshold, Arm arm,
                                const fs::path& out) {
  require(!frames.empty(), Errc::invalid_argument, "no input frames");
  DetectorParams det;
  det.gray_threshold = threshold;
  std::optional<io::StackFile> stack;
  std::uint64_t k = 0;
  for (const auto& p : frames) {
    const GrayImage g = io::read_pgm(p);
    if (!stack) stack.emplace(out, static_cast<std::uint32_t>(g.width), static_cast<std::uint32_t>(g.height), arm);
    stack->append(threshold_grayscale(g, det, k++, arm));
  }
  stack->close();
  return k;
}

}  // namespace pipeline
}  // namespace qholo
