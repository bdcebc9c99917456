#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qholo/crystal.hpp"
#include "qholo/error.hpp"
#include "qholo/io.hpp"
#include "qholo/spdc.hpp"

namespace qholo {

/// Every run parameter, with units in the key names. Wavelengths are
/// entered in nm and converted to mm when used.
struct RunConfig {
  // grid
  std::size_t grid_n = 256;
  double grid_dx_mm = 1.0 / 32.0;
  // optics
  double signal_wavelength_nm = 710.0;
  double pump_wavelength_nm = 355.0;
  std::string pump_profile = "gaussian";  // gaussian | uniform
  double pump_sigma_mm = 0.68;
  double focal_length_mm = 50.0;
  // crystal
  double crystal_length_mm = 0.8;
  double n_signal = 0.0;  // 0: BBO type-II Sellmeier value
  double n_idler = 0.0;
  double phase_matching_fwhm_per_mm = 64.0;
  double gain_g0 = 0.3;
  // hologram
  std::string pattern = "dirac9";  // dirac9 | dirac | smiley | bitmap | uniform
  int dirac_n = 3;
  double dirac_spacing_per_mm = 1.5;
  double smiley_diameter_per_mm = 10.0;
  double speckle_grain_per_mm = 0.5;
  std::uint64_t speckle_seed = 7;
  std::string bitmap_path;
  double carrier_x_per_mm = 6.0;
  double carrier_y_per_mm = 0.0;
  double phase_step_rad = 0.5 * std::numbers::pi;
  double depth_error = 0.0;
  // simulation
  std::string engine = "pair_sampling";  // pair_sampling | wigner
  std::uint64_t frames = 1000;
  std::uint64_t master_seed = 1;
  double defocus_mm = 0.0;
  double eta = 0.25;
  double dark_prob = 0.0;
  double mean_pairs_per_frame = 400.0;
  double background_per_frame = 0.0;
  int split_steps = 8;
  // analysis
  double db_floor = -30.0;
  double peak_window_per_mm = 1.0;
  double order_half_width_per_mm = 2.0;
  unsigned workers = 0;

  Grid2D grid() const { return Grid2D::square(grid_n, grid_dx_mm); }
  double signal_wavelength_mm() const { return nm_to_mm(signal_wavelength_nm); }

  CrystalParams crystal() const {
    CrystalParams c = CrystalParams::bbo_type2(crystal_length_mm, gain_g0);
    if (n_signal > 0.0) c.n_signal = n_signal;
    if (n_idler > 0.0) c.n_idler = n_idler;
    c.pump_wavelength_mm = nm_to_mm(pump_wavelength_nm);
    c.signal_wavelength_mm = signal_wavelength_mm();
    c.sigma_phi_per_mm = fwhm_to_sigma(phase_matching_fwhm_per_mm);
    return c;
  }

  PumpParams pump() const { return {pump_sigma_mm}; }

  ComplexField pump_field() const {
    const double lp = nm_to_mm(pump_wavelength_nm);
    if (pump_profile == "uniform") return uniform_beam(grid(), lp);
    require(pump_profile == "gaussian", Errc::invalid_argument,
            "pump_profile must be gaussian or uniform");
    return gaussian_beam(grid(), pump_sigma_mm, lp);
  }

  SimConfig sim() const {
    SimConfig s;
    if (engine == "wigner") {
      s.engine = EngineKind::wigner;
    } else {
      require(engine == "pair_sampling", Errc::invalid_argument,
              "engine must be pair_sampling or wigner");
      s.engine = EngineKind::pair_sampling;
    }
    s.frames = frames;
    s.master_seed = master_seed;
    s.defocus_mm = defocus_mm;
    s.eta = eta;
    s.mean_pairs_per_frame = mean_pairs_per_frame;
    s.background_per_frame = background_per_frame;
    s.split_steps = split_steps;
    s.validate();
    return s;
  }

  DetectorParams detector() const {
    DetectorParams d;
    d.eta = eta;
    d.dark_prob = dark_prob;
    d.validate();
    return d;
  }

  /// Applies key=value pairs; unknown keys and unparsable values are errors.
  void apply(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) set(k, v);
  }

  void set(const std::string& key, const std::string& value) {
    bool found = false;
    visit([&](const std::string& k, auto& field) {
      if (k != key) return;
      found = true;
      parse_into(key, value, field);
    });
    require(found, Errc::invalid_argument, "unknown config key '" + key + "'");
  }

  std::vector<std::string> keys() {
    std::vector<std::string> out;
    visit([&](const std::string& k, auto&) { out.push_back(k); });
    return out;
  }

  /// Canonical manifest body: sorted keys, round-trippable numbers.
  std::string canonical() const {
    std::map<std::string, std::string> kv;
    const_cast<RunConfig*>(this)->visit(
        [&](const std::string& k, auto& field) { kv[k] = render(field); });
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
    return os.str();
  }

  /// Reads a config file or a run manifest; manifest header keys are skipped.
  static RunConfig from_file(const io::fs::path& p) {
    RunConfig c;
    auto kv = io::parse_key_values(io::detail::read_file(p), p.string());
    std::erase_if(kv, [](const auto& e) {
      const std::string& k = e.first;
      return k == "command" || k == "created_utc" || k == "tool_version" ||
             (k.starts_with("input_") && k.ends_with("_fnv1a"));
    });
    c.apply(kv);
    return c;
  }

 private:
  template <class F>
  void visit(F&& f) {
    f("grid_n", grid_n);
    f("grid_dx_mm", grid_dx_mm);
    f("signal_wavelength_nm", signal_wavelength_nm);
    f("pump_wavelength_nm", pump_wavelength_nm);
    f("pump_profile", pump_profile);
    f("pump_sigma_mm", pump_sigma_mm);
    f("focal_length_mm", focal_length_mm);
    f("crystal_length_mm", crystal_length_mm);
    f("n_signal", n_signal);
    f("n_idler", n_idler);
    f("phase_matching_fwhm_per_mm", phase_matching_fwhm_per_mm);
    f("gain_g0", gain_g0);
    f("pattern", pattern);
    f("dirac_n", dirac_n);
    f("dirac_spacing_per_mm", dirac_spacing_per_mm);
    f("smiley_diameter_per_mm", smiley_diameter_per_mm);
    f("speckle_grain_per_mm", speckle_grain_per_mm);
    f("speckle_seed", speckle_seed);
    f("bitmap_path", bitmap_path);
    f("carrier_x_per_mm", carrier_x_per_mm);
    f("carrier_y_per_mm", carrier_y_per_mm);
    f("phase_step_rad", phase_step_rad);
    f("depth_error", depth_error);
    f("engine", engine);
    f("frames", frames);
    f("master_seed", master_seed);
    f("defocus_mm", defocus_mm);
    f("eta", eta);
    f("dark_prob", dark_prob);
    f("mean_pairs_per_frame", mean_pairs_per_frame);
    f("background_per_frame", background_per_frame);
    f("split_steps", split_steps);
    f("db_floor", db_floor);
    f("peak_window_per_mm", peak_window_per_mm);
    f("order_half_width_per_mm", order_half_width_per_mm);
    f("workers", workers);
  }

  template <class T>
  static void parse_into(const std::string& key, const std::string& text, T& out) {
    auto bad = [&] { return Error(Errc::invalid_argument, "bad value '" + text + "' for " + key); };
    if constexpr (std::is_same_v<T, std::string>) {
      out = text;
    } else {
      std::size_t pos = 0;
      try {
        if constexpr (std::is_floating_point_v<T>) {
          out = std::stod(text, &pos);
        } else if constexpr (std::is_signed_v<T>) {
          out = static_cast<T>(std::stoll(text, &pos));
        } else {
          require(!text.empty() && text[0] != '-', Errc::invalid_argument,
                  "negative value for " + key);
          out = static_cast<T>(std::stoull(text, &pos));
        }
      } catch (const Error&) {
        throw;
      } catch (const std::exception&) {
        throw bad();
      }
      if (pos != text.size()) throw bad();
    }
  }

  template <class T>
  static std::string render(const T& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_floating_point_v<T>) {
      return io::format_double(v);
    } else {
      return std::to_string(v);
    }
  }
};

}  // namespace qholo
