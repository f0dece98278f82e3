#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotwave/dynamics.hpp"
#include "rotwave/functionals.hpp"
#include "rotwave/minimizer.hpp"
#include "rotwave/qsolver.hpp"

namespace rotwave::io {

using nlohmann::json;

/// Field dump: `<base>.rwf` is a JSON header, `<base>.rwf.bin` the raw payload
/// of little-endian f64 (re, im) pairs in row-major axis order.
inline void write_rwf(const std::filesystem::path& base, const ComplexField& f,
                      const ModelParams& params) {
  const Grid& g = f.grid();
  json header;
  header["format"] = "rwf-1";
  header["dim"] = g.dim();
  header["points"] = g.spec().points;
  header["half_widths"] = g.spec().half_widths;
  header["gamma"] = params.gamma;
  header["omega"] = params.omega;
  header["p"] = params.p;
  std::ofstream hs(base);
  if (!hs) throw std::runtime_error("write_rwf: cannot open " + base.string());
  hs << header.dump(2) << "\n";

  std::filesystem::path bin = base;
  bin += ".bin";
  std::ofstream bs(bin, std::ios::binary);
  if (!bs) throw std::runtime_error("write_rwf: cannot open " + bin.string());
  for (const cplx& z : f.values()) {
    const double re = z.real(), im = z.imag();
    bs.write(reinterpret_cast<const char*>(&re), sizeof(double));
    bs.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
}

inline ComplexField read_rwf(const std::filesystem::path& base) {
  std::ifstream hs(base);
  if (!hs) throw std::runtime_error("read_rwf: cannot open " + base.string());
  json header = json::parse(hs);
  GridSpec spec;
  spec.dim = header.at("dim").get<int>();
  spec.half_widths = header.at("half_widths").get<std::vector<double>>();
  spec.points = header.at("points").get<std::vector<int>>();
  ComplexField f(build_grid(spec));

  std::filesystem::path bin = base;
  bin += ".bin";
  std::ifstream bs(bin, std::ios::binary);
  if (!bs) throw std::runtime_error("read_rwf: cannot open " + bin.string());
  for (cplx& z : f.values()) {
    double re = 0.0, im = 0.0;
    bs.read(reinterpret_cast<char*>(&re), sizeof(double));
    bs.read(reinterpret_cast<char*>(&im), sizeof(double));
    z = {re, im};
  }
  if (!bs) throw std::runtime_error("read_rwf: payload truncated in " + bin.string());
  return f;
}

inline json breakdown_to_json(const EnergyBreakdown& b) {
  return json{{"mass", b.mass},
              {"kinetic", b.kinetic},
              {"magnetic_kinetic", b.magnetic_kinetic},
              {"potential_full", b.potential_full},
              {"potential_partial", b.potential_partial},
              {"interaction", b.interaction},
              {"angular", b.angular},
              {"H_gamma", b.h_gamma},
              {"E_rot", b.e_rot},
              {"E_mag", b.e_mag},
              {"angular_im_residual", b.angular_im_residual},
              {"boundary_mass", b.boundary_mass}};
}

inline json result_to_json(const MinimizerResult& r, bool with_trace = true) {
  json j{{"status", to_string(r.status)},
         {"energy", r.energy},
         {"mass", r.mass},
         {"multiplier", r.multiplier},
         {"residual", r.residual},
         {"h_gamma", r.h_gamma},
         {"boundary_mass", r.boundary_mass},
         {"boundary_flag", r.boundary_flag},
         {"iterations", r.iterations},
         {"message", r.message}};
  if (with_trace) {
    json tr = json::array();
    for (const auto& p : r.trace) tr.push_back({{"energy", p.energy}, {"residual", p.residual}});
    j["trace"] = tr;
  }
  return j;
}

inline json bounds_to_json(const BoundsReport& b) {
  return json{{"omega0", b.omega0},
              {"upper_I", b.upper_I},
              {"B_const", b.B_const},
              {"alpha", b.alpha},
              {"beta", b.beta},
              {"c", b.c},
              {"m", b.m},
              {"gap_holds", b.gap_holds},
              {"c0", b.c0},
              {"omega_window", {b.omega_window_lo, b.omega_window_hi}}};
}

inline void profile_to_csv(const std::filesystem::path& path, const RadialProfile& prof) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("profile_to_csv: cannot open " + path.string());
  os << "r,W\n";
  os.precision(17);
  for (std::size_t i = 0; i < prof.r_nodes.size(); ++i)
    os << prof.r_nodes[i] << "," << prof.values[i] << "\n";
}

inline json certificate_to_json(const RadialProfile& prof) {
  return json{{"dim", prof.dim},
              {"exponent", prof.exponent},
              {"w0", prof.w0},
              {"mass", prof.mass},
              {"grad_sq", prof.grad_sq},
              {"lp_norm", prof.lp_norm},
              {"second_moment", prof.second_moment},
              {"pohozaev_res1", prof.pohozaev_res1},
              {"pohozaev_res2", prof.pohozaev_res2},
              {"bisections", prof.bisections}};
}

inline void trace_to_csv(const std::filesystem::path& path, const EvolutionTrace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("trace_to_csv: cannot open " + path.string());
  os << "t,mass,energy,angular,h_gamma,identity_residual\n";
  os.precision(17);
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    os << trace.times[i] << "," << trace.mass_series[i] << "," << trace.energy_series[i] << ","
       << trace.angular_series[i] << "," << trace.h_gamma_series[i] << ","
       << trace.momentum_identity_residual[i] << "\n";
}

inline json stability_to_json(const StabilityReport& rep) {
  return json{{"delta", rep.delta},
              {"seed", rep.seed},
              {"max_distance", rep.max_distance},
              {"initial_distance", rep.initial_distance},
              {"ratio", rep.ratio},
              {"max_h_gamma", rep.max_h_gamma},
              {"verdict",
               rep.verdict == StabilityVerdict::StableAtScale ? "STABLE_AT_SCALE"
                                                              : "GROWTH_DETECTED"},
              {"times", rep.times},
              {"distances", rep.distances}};
}

/// FNV-1a 64-bit content hash used by run manifests.
inline std::uint64_t fnv1a64(std::span<const char> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("hash_file: cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return fnv1a64(buf);
}

}  // namespace rotwave::io
