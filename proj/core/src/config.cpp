// SPDX-License-Identifier: MIT
#include "fsda/config.hpp"

#include <fstream>

#include "fsda/errors.hpp"
#include "kv_util.hpp"

namespace fsda {

void SolverConfig::validate() const {
  const auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0)) {
      throw FsdaError(std::string("config: ") + name + " must be >= 0");
    }
  };
  nonneg(tol, "tol");
  nonneg(tau_g, "tau_g");
  nonneg(tau_h, "tau_h");
  nonneg(tau_r, "tau_r");
  nonneg(eps_b, "eps_b");
  nonneg(eps_l, "eps_l");
  nonneg(band_drop, "band_drop");
  if (max_iter < 1) throw FsdaError("config: max_iter must be >= 1");
  if (m_max < -1) throw FsdaError("config: m_max must be >= -1");
  if (max_bw < -1) throw FsdaError("config: max_bw must be >= -1");
}

SolverConfig read_config(const std::string& path) {
  SolverConfig cfg;
  for (const auto& [key, value] : detail::read_kv(path)) {
    if (key == "tol") {
      cfg.tol = detail::parse_double(value, path);
    } else if (key == "tau_g") {
      cfg.tau_g = detail::parse_double(value, path);
    } else if (key == "tau_h") {
      cfg.tau_h = detail::parse_double(value, path);
    } else if (key == "tau_r") {
      cfg.tau_r = detail::parse_double(value, path);
    } else if (key == "eps_b") {
      cfg.eps_b = detail::parse_double(value, path);
    } else if (key == "eps_l") {
      cfg.eps_l = detail::parse_double(value, path);
    } else if (key == "m_max") {
      cfg.m_max = static_cast<int>(detail::parse_int(value, path));
    } else if (key == "max_iter") {
      cfg.max_iter = static_cast<int>(detail::parse_int(value, path));
    } else if (key == "band_drop") {
      cfg.band_drop = detail::parse_double(value, path);
    } else if (key == "max_bw") {
      cfg.max_bw = static_cast<int>(detail::parse_int(value, path));
    } else if (key == "denominator") {
      if (value == "verbatim") {
        cfg.denominator = DenominatorMode::kVerbatim;
      } else if (value == "GH") {
        cfg.denominator = DenominatorMode::kGH;
      } else {
        throw ParseError(path, "denominator must be 'verbatim' or 'GH'");
      }
    } else if (key == "speculative") {
      if (value == "1" || value == "true") {
        cfg.speculative = true;
      } else if (value == "0" || value == "false") {
        cfg.speculative = false;
      } else {
        throw ParseError(path, "speculative must be a boolean");
      }
    } else {
      throw ParseError(path, "unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void write_config(const SolverConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FsdaError("cannot open '" + path + "' for writing");
  out << "tol=" << detail::fmt17(cfg.tol) << "\n"
      << "tau_g=" << detail::fmt17(cfg.tau_g) << "\n"
      << "tau_h=" << detail::fmt17(cfg.tau_h) << "\n"
      << "tau_r=" << detail::fmt17(cfg.tau_r) << "\n"
      << "eps_b=" << detail::fmt17(cfg.eps_b) << "\n"
      << "eps_l=" << detail::fmt17(cfg.eps_l) << "\n"
      << "m_max=" << cfg.m_max << "\n"
      << "max_iter=" << cfg.max_iter << "\n"
      << "band_drop=" << detail::fmt17(cfg.band_drop) << "\n"
      << "max_bw=" << cfg.max_bw << "\n"
      << "denominator="
      << (cfg.denominator == DenominatorMode::kVerbatim ? "verbatim" : "GH")
      << "\n"
      << "speculative=" << (cfg.speculative ? 1 : 0) << "\n";
}

}  // namespace fsda
