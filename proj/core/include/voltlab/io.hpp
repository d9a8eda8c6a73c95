#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "voltlab/dynamics.hpp"
#include "voltlab/fnspace.hpp"
#include "voltlab/weakclosure.hpp"
#include "voltlab/witness.hpp"

namespace voltlab::io {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

/// CSV layout: header "index,node,value_re,value_im", one row per node,
/// doubles in shortest round-trip form. A sidecar JSON next to the CSV
/// (extension swapped to .json) carries {n, h, p}.
void write_grid_function(const std::filesystem::path& csv, const RealFn& f);
RealFn read_grid_function(const std::filesystem::path& csv);

/// CSV layout: "n,log_norm,functional_1,...,functional_k" where column j
/// holds <f_j, unit_n> (the value against the renormalized orbit point;
/// multiply by exp(log_norm) for the raw orbit value).
std::string orbit_csv(const Orbit<double>& orb, const std::vector<Vec>& functionals,
                      double weight);

/// JSON rows {"n", "log_lhs", "log_rhs", "margin"} plus the shared constants
/// of the bound.
std::string margins_json(const FunctionalGrowthReport& rep);

/// Certificate JSON: k, epsilon, seed, trial, per-point margins, failure
/// bound, scope flag, a functionals_ref naming the CSV the functionals were
/// written to, and the gaussian draws inline when they were stored.
std::string certificate_json(const Certificate& cert, const std::string& functionals_ref);

/// Functionals as CSV: "index,u_1,...,u_k" (one row per coordinate).
std::string functionals_csv(const std::vector<Vec>& us);

/// Small-ball table: "n,a_n,exact,linear,coarse,empirical,mc_sigma".
std::string small_ball_csv(const std::vector<SmallBallRow>& rows);

}  // namespace voltlab::io
