#pragma once

#include <cmath>
#include <vector>

#include "qholo/error.hpp"
#include "qholo/field.hpp"
#include "qholo/holography.hpp"
#include "qholo/image.hpp"

namespace qholo {

/// Coincidence-rate map over the sum frequency nu = (r1 + r2) / (lambda f),
/// non-negative with unit total mass.
using OracleMap = FrequencyImage;

/// |FT(E_p t^2)|^2, i.e. |E_p~ * t^2~|^2 by the convolution theorem, for an
/// arbitrary squared transmission (near-field, same grid as the pump).
inline OracleMap coincidence_map_from_product(const ComplexField& pump, const ComplexField& t2) {
  require(pump.plane == Plane::near_field && t2.plane == Plane::near_field,
          Errc::plane_mismatch, "oracle inputs must be near-field");
  require(pump.grid == t2.grid, Errc::grid_mismatch, "pump and hologram grids differ");
  ComplexField product = pump;
  for (std::size_t i = 0; i < product.data.size(); ++i) product.data[i] *= t2.data[i];
  const ComplexField far = fft2_centered(product);
  OracleMap map(pump.grid.nx(), pump.grid.ny(), pump.grid.dnu_x(), pump.grid.dnu_y());
  double total = 0.0;
  for (std::size_t i = 0; i < far.data.size(); ++i) {
    map.values[i] = std::norm(far.data[i]);
    total += map.values[i];
  }
  require(total > 0.0, Errc::degenerate_input, "coincidence map is identically zero");
  for (auto& v : map.values) v /= total;
  return map;
}

inline OracleMap analytic_coincidence_map(const ComplexField& pump, const PhaseHologram& holo) {
  require(pump.grid == holo.grid, Errc::grid_mismatch, "pump and hologram grids differ");
  return coincidence_map_from_product(pump, transmission(holo, /*squared=*/true));
}

/// Single-photon (coherent) readout of the same plate, |FT(E_p t)|^2.
inline OracleMap classical_coherent_map(const ComplexField& pump, const PhaseHologram& holo) {
  require(pump.grid == holo.grid, Errc::grid_mismatch, "pump and hologram grids differ");
  return coincidence_map_from_product(pump, transmission(holo, /*squared=*/false));
}

struct MapComparison {
  double pearson = 0.0;
  double l2_rel = 0.0;  // ||a - b|| / ||b||
};

inline MapComparison compare_maps(const FrequencyImage& a, const FrequencyImage& b,
                                  const Window& window = Window::all()) {
  require(a.same_grid(b), Errc::grid_mismatch, "compared maps are on different grids");
  const auto idx = window_indices(a, window);
  require(idx.size() >= 2, Errc::invalid_argument, "comparison window is empty");
  double ma = 0.0, mb = 0.0;
  for (auto i : idx) {
    ma += a.values[i];
    mb += b.values[i];
  }
  ma /= static_cast<double>(idx.size());
  mb /= static_cast<double>(idx.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0, d2 = 0.0, b2 = 0.0;
  for (auto i : idx) {
    const double da = a.values[i] - ma;
    const double db = b.values[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
    const double diff = a.values[i] - b.values[i];
    d2 += diff * diff;
    b2 += b.values[i] * b.values[i];
  }
  require(saa > 0.0 && sbb > 0.0, Errc::degenerate_input,
          "cannot compare a map with zero variance");
  return {sab / std::sqrt(saa * sbb), std::sqrt(d2 / b2)};
}

}  // namespace qholo
