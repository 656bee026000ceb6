/**
 * @file lp.hpp
 * @brief Small dense linear-programming toolkit.
 *
 * solve_lp() is a two-phase primal simplex on a dense tableau with bounded
 * variables (non-basic columns sit at their lower or upper bound). Rows are
 * scaled to unit max coefficient. After the last pivot the basic values are
 * recomputed from the original columns with an LU solve so that reported
 * residuals reflect the returned point rather than tableau drift.
 *
 * An optional secondary objective is minimised over the optimal face of the
 * primary one, which gives deterministic answers when the primary optimum is
 * not unique.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ven/core.hpp"

namespace ven {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { less_equal, greater_equal, equal };

struct LpTerm {
  std::uint32_t var;
  double coef;
};

struct LpRow {
  std::string name;
  std::vector<LpTerm> terms;
  RowSense sense{RowSense::less_equal};
  double rhs{0.0};
};

/// min cost'x  subject to rows and lower <= x <= upper.
struct LinearProgram {
  std::vector<std::string> names;
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> rows;

  std::uint32_t add_variable(std::string name, double c, double lo = 0.0, double hi = kInfinity) {
    names.push_back(std::move(name));
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<std::uint32_t>(cost.size() - 1);
  }

  void add_row(std::string name, std::vector<LpTerm> terms, RowSense sense, double rhs) {
    rows.push_back(LpRow{std::move(name), std::move(terms), sense, rhs});
  }

  std::size_t variable_count() const noexcept { return cost.size(); }
  std::size_t row_count() const noexcept { return rows.size(); }
};

inline double row_activity(const LpRow& row, std::span<const double> x) {
  double v = 0.0;
  for (const auto& t : row.terms) v += t.coef * x[t.var];
  return v;
}

/**
 * @brief Largest constraint violation of `x`, with each row measured in
 * units where its largest coefficient (or its right-hand side, if bigger)
 * is one. Bound violations are measured relative to max(1, |bound|).
 */
inline double max_scaled_violation(const LinearProgram& lp, std::span<const double> x) {
  double worst = 0.0;
  for (const auto& row : lp.rows) {
    double scale = std::abs(row.rhs);
    for (const auto& t : row.terms) scale = std::max(scale, std::abs(t.coef));
    if (scale == 0.0) scale = 1.0;
    const double a = row_activity(row, x);
    double v = 0.0;
    switch (row.sense) {
      case RowSense::less_equal: v = a - row.rhs; break;
      case RowSense::greater_equal: v = row.rhs - a; break;
      case RowSense::equal: v = std::abs(a - row.rhs); break;
    }
    worst = std::max(worst, v / scale);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max(worst, (lp.lower[j] - x[j]) / std::max(1.0, std::abs(lp.lower[j])));
    if (std::isfinite(lp.upper[j])) {
      worst = std::max(worst, (x[j] - lp.upper[j]) / std::max(1.0, std::abs(lp.upper[j])));
    }
  }
  return worst;
}

enum class LpStatus { optimal, infeasible };

struct LpResult {
  LpStatus status{LpStatus::infeasible};
  std::vector<double> x;
  double objective{0.0};
  std::size_t iterations{0};
  double max_residual{0.0};
};

struct SimplexOptions {
  double pivot_tol{1e-11};
  double reduced_cost_tol{1e-10};
  double feasibility_tol{1e-8};
  std::size_t max_iterations{2'000'000};
  /// Tie-break objective minimised over the optimal face; empty to skip.
  std::vector<double> secondary_cost;
};

namespace detail {

class Simplex {
 public:
  enum class Status : std::uint8_t { basic, at_lower, at_upper };

  Simplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {}

  LpResult solve() {
    LpResult result;
    if (!setup()) {
      result.status = LpStatus::infeasible;
      return result;
    }

    // Phase 1: drive artificials to zero.
    std::vector<double> phase1(cols_, 0.0);
    for (std::size_t j = first_artificial_; j < cols_; ++j) phase1[j] = 1.0;
    iterate(phase1);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] >= first_artificial_) infeasibility += beta_[i];
    }
    if (infeasibility > opt_.feasibility_tol * std::max(1.0, rhs_scale_)) {
      result.status = LpStatus::infeasible;
      result.iterations = iterations_;
      return result;
    }
    for (std::size_t j = first_artificial_; j < cols_; ++j) hi_[j] = 0.0;
    evict_artificials();

    // Phase 2.
    std::vector<double> phase2(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) phase2[j] = lp_.cost[j];
    iterate(phase2);

    if (!opt_.secondary_cost.empty()) {
      for (std::size_t j = 0; j < cols_; ++j) {
        if (status_[j] == Status::basic || lo_[j] == hi_[j]) continue;
        if (std::abs(d_[j]) > opt_.reduced_cost_tol) {
          const double v = value_of(j);
          lo_[j] = hi_[j] = v;
        }
      }
      std::vector<double> secondary(cols_, 0.0);
      for (std::size_t j = 0; j < n_ && j < opt_.secondary_cost.size(); ++j) {
        secondary[j] = opt_.secondary_cost[j];
      }
      iterate(secondary);
    }

    polish();
    result.status = LpStatus::optimal;
    result.x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) result.x[j] = value_of(j);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) result.x[basis_[i]] = beta_[i];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      // Clamp rounding noise; the residual below is measured after clamping.
      result.x[j] = std::clamp(result.x[j], lp_.lower[j], lp_.upper[j]);
    }
    result.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) result.objective += lp_.cost[j] * result.x[j];
    result.iterations = iterations_;
    result.max_residual = max_scaled_violation(lp_, result.x);
    return result;
  }

 private:
  double& tab(std::size_t i, std::size_t j) { return tab_[i * cols_ + j]; }
  double& a(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }

  double value_of(std::size_t j) const {
    return status_[j] == Status::at_upper ? hi_[j] : lo_[j];
  }

  bool setup() {
    n_ = lp_.variable_count();
    for (std::size_t j = 0; j < n_; ++j) {
      if (!std::isfinite(lp_.lower[j])) throw SolverError("variables need a finite lower bound");
      if (lp_.upper[j] < lp_.lower[j]) return false;
    }

    // Empty rows are checked directly; the rest enter the tableau scaled.
    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < lp_.rows.size(); ++r) {
      const LpRow& row = lp_.rows[r];
      double mx = 0.0;
      for (const auto& t : row.terms) mx = std::max(mx, std::abs(t.coef));
      if (mx == 0.0) {
        const bool ok = (row.sense == RowSense::less_equal && 0.0 <= row.rhs) ||
                        (row.sense == RowSense::greater_equal && 0.0 >= row.rhs) ||
                        (row.sense == RowSense::equal && row.rhs == 0.0);
        if (!ok) return false;
        continue;
      }
      kept.push_back(r);
    }
    m_ = kept.size();
    std::size_t slacks = 0;
    for (std::size_t r : kept) slacks += lp_.rows[r].sense != RowSense::equal;

    // Worst case every row needs an artificial.
    first_artificial_ = n_ + slacks;
    cols_ = first_artificial_ + m_;
    if (static_cast<double>(m_) * static_cast<double>(cols_) > 4e8) {
      throw SolverError("LP too large for the dense simplex");
    }
    a_.assign(m_ * cols_, 0.0);
    b_.assign(m_, 0.0);
    lo_.assign(cols_, 0.0);
    hi_.assign(cols_, kInfinity);
    status_.assign(cols_, Status::at_lower);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
    }

    std::vector<std::ptrdiff_t> slack_of(m_, -1);
    std::size_t next_slack = n_;
    rhs_scale_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const LpRow& row = lp_.rows[kept[i]];
      double mx = 0.0;
      for (const auto& t : row.terms) mx = std::max(mx, std::abs(t.coef));
      const double s = 1.0 / mx;
      for (const auto& t : row.terms) a(i, t.var) += t.coef * s;
      b_[i] = row.rhs * s;
      rhs_scale_ = std::max(rhs_scale_, std::abs(b_[i]));
      if (row.sense != RowSense::equal) {
        a(i, next_slack) = row.sense == RowSense::less_equal ? 1.0 : -1.0;
        slack_of[i] = static_cast<std::ptrdiff_t>(next_slack++);
      }
    }

    // Start from every structural at its lower bound.
    basis_.assign(m_, 0);
    beta_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double r = b_[i];
      for (std::size_t j = 0; j < n_; ++j) r -= a(i, j) * lo_[j];
      const std::size_t art = first_artificial_ + i;
      if (slack_of[i] >= 0 && a(i, static_cast<std::size_t>(slack_of[i])) * r >= 0.0) {
        const auto sj = static_cast<std::size_t>(slack_of[i]);
        basis_[i] = sj;
        beta_[i] = a(i, sj) * r;
        hi_[art] = 0.0;  // unused artificial
      } else {
        a(i, art) = r >= 0.0 ? 1.0 : -1.0;
        basis_[i] = art;
        beta_[i] = std::abs(r);
      }
      status_[basis_[i]] = Status::basic;
    }

    tab_ = a_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double piv = a(i, basis_[i]);
      if (piv != 1.0) {
        for (std::size_t j = 0; j < cols_; ++j) tab(i, j) /= piv;
      }
    }
    return true;
  }

  void price(const std::vector<double>& cost) {
    d_ = cost;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = &tab_[r * cols_];
    const double piv = prow[q];
    for (std::size_t j = 0; j < cols_; ++j) prow[j] /= piv;
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    const double f = d_[q];
    if (f != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= f * prow[j];
      d_[q] = 0.0;
    }
    status_[basis_[r]] = Status::at_lower;  // caller fixes the side
    basis_[r] = q;
    status_[q] = Status::basic;
  }

  void iterate(const std::vector<double>& cost) {
    price(cost);
    std::size_t degenerate_run = 0;
    bool bland = false;
    while (true) {
      if (++iterations_ > opt_.max_iterations) throw SolverError("simplex iteration limit reached");

      std::ptrdiff_t q = -1;
      int dir = 0;
      double best = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (status_[j] == Status::basic || lo_[j] == hi_[j]) continue;
        double score = 0.0;
        int dj = 0;
        if (status_[j] == Status::at_lower && d_[j] < -opt_.reduced_cost_tol) {
          score = -d_[j];
          dj = 1;
        } else if (status_[j] == Status::at_upper && d_[j] > opt_.reduced_cost_tol) {
          score = d_[j];
          dj = -1;
        }
        if (dj == 0) continue;
        if (bland) {
          q = static_cast<std::ptrdiff_t>(j);
          dir = dj;
          break;
        }
        if (score > best) {
          best = score;
          q = static_cast<std::ptrdiff_t>(j);
          dir = dj;
        }
      }
      if (q < 0) return;
      const auto qc = static_cast<std::size_t>(q);

      double theta = hi_[qc] - lo_[qc];
      std::ptrdiff_t leave = -1;
      double leave_alpha = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = tab(i, qc) * dir;
        const std::size_t bi = basis_[i];
        double lim;
        if (alpha > opt_.pivot_tol) {
          lim = (beta_[i] - lo_[bi]) / alpha;
        } else if (alpha < -opt_.pivot_tol && std::isfinite(hi_[bi])) {
          lim = (hi_[bi] - beta_[i]) / (-alpha);
        } else {
          continue;
        }
        lim = std::max(lim, 0.0);
        const double tol = 1e-12 * std::max(1.0, std::isfinite(theta) ? theta : lim);
        bool take = false;
        if (!std::isfinite(theta) || lim < theta - tol) {
          take = true;
        } else if (lim <= theta + tol && leave >= 0) {
          // Ties between rows: stable pivot, or lowest basic index under Bland.
          take = bland ? bi < basis_[static_cast<std::size_t>(leave)]
                       : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          theta = lim;
          leave = static_cast<std::ptrdiff_t>(i);
          leave_alpha = alpha;
        }
      }
      if (!std::isfinite(theta)) throw SolverError("LP is unbounded");

      for (std::size_t i = 0; i < m_; ++i) beta_[i] -= tab(i, qc) * dir * theta;
      const double entering = (dir > 0 ? lo_[qc] : hi_[qc]) + dir * theta;

      if (leave < 0) {
        status_[qc] = dir > 0 ? Status::at_upper : Status::at_lower;
      } else {
        const auto r = static_cast<std::size_t>(leave);
        const std::size_t out = basis_[r];
        pivot(r, qc);
        status_[out] = leave_alpha > 0 ? Status::at_lower : Status::at_upper;
        beta_[r] = entering;
      }

      if (theta <= 1e-12) {
        if (++degenerate_run > 50) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  // Replaces basic artificials (at zero) by structural or slack columns.
  void evict_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      std::ptrdiff_t best = -1;
      double mag = 1e-9;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (status_[j] == Status::basic) continue;
        if (std::abs(tab(i, j)) > mag) {
          mag = std::abs(tab(i, j));
          best = static_cast<std::ptrdiff_t>(j);
        }
      }
      if (best < 0) continue;  // redundant row, artificial stays basic at zero
      const auto q = static_cast<std::size_t>(best);
      const double v = value_of(q);
      const std::size_t out = basis_[i];
      d_.assign(cols_, 0.0);
      pivot(i, q);
      status_[out] = Status::at_lower;
      beta_[i] = v;
    }
  }

  void polish() {
    if (m_ == 0) return;
    Eigen::MatrixXd B(m_, m_);
    Eigen::VectorXd rhs(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double r = b_[i];
      for (std::size_t j = 0; j < cols_; ++j) {
        if (status_[j] == Status::basic) continue;
        const double v = value_of(j);
        if (v != 0.0) r -= a(i, j) * v;
      }
      rhs(static_cast<Eigen::Index>(i)) = r;
      for (std::size_t k = 0; k < m_; ++k) {
        B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = a(i, basis_[k]);
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::VectorXd xb = lu.solve(rhs);
    if (!xb.allFinite()) return;
    for (std::size_t k = 0; k < m_; ++k) {
      const double v = xb(static_cast<Eigen::Index>(k));
      // Keep the refined value only when it agrees with the tableau value.
      if (std::abs(v - beta_[k]) <= 1e-6 * std::max(1.0, std::abs(beta_[k]))) beta_[k] = v;
    }
  }

  const LinearProgram& lp_;
  const SimplexOptions& opt_;
  std::size_t n_{0}, m_{0}, cols_{0}, first_artificial_{0};
  std::vector<double> a_, tab_, b_, lo_, hi_, beta_, d_;
  std::vector<std::size_t> basis_;
  std::vector<Status> status_;
  std::size_t iterations_{0};
  double rhs_scale_{0.0};
};

}  // namespace detail

inline LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& options = {}) {
  detail::Simplex simplex(lp, options);
  return simplex.solve();
}

/// Writes the program in CPLEX LP text format.
inline std::string to_cplex_lp(const LinearProgram& lp) {
  std::ostringstream os;
  auto term = [&](double c, std::uint32_t v, bool first) {
    if (first) {
      os << fmt::format("{} {}", fmt::format("{:.17g}", c), lp.names[v]);
    } else {
      os << fmt::format(" {} {:.17g} {}", c < 0 ? '-' : '+', std::abs(c), lp.names[v]);
    }
  };
  os << "\\ loss minimisation over energy paths\n";
  os << "Minimize\n obj:";
  bool any = false;
  for (std::uint32_t j = 0; j < lp.variable_count(); ++j) {
    if (lp.cost[j] == 0.0) continue;
    if (!any) os << ' ';
    term(lp.cost[j], j, !any);
    any = true;
  }
  if (!any) os << " 0 " << (lp.variable_count() > 0 ? lp.names[0] : std::string("x"));
  os << "\nSubject To\n";
  for (const auto& row : lp.rows) {
    os << ' ' << row.name << ':';
    bool first = true;
    for (const auto& t : row.terms) {
      if (first) os << ' ';
      term(t.coef, t.var, first);
      first = false;
    }
    if (row.terms.empty()) os << " 0 " << (lp.variable_count() > 0 ? lp.names[0] : std::string("x"));
    switch (row.sense) {
      case RowSense::less_equal: os << " <= "; break;
      case RowSense::greater_equal: os << " >= "; break;
      case RowSense::equal: os << " = "; break;
    }
    os << fmt::format("{:.17g}", row.rhs) << '\n';
  }
  os << "Bounds\n";
  for (std::uint32_t j = 0; j < lp.variable_count(); ++j) {
    if (std::isfinite(lp.upper[j])) {
      os << fmt::format(" {:.17g} <= {} <= {:.17g}\n", lp.lower[j], lp.names[j], lp.upper[j]);
    } else {
      os << fmt::format(" {} >= {:.17g}\n", lp.names[j], lp.lower[j]);
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace ven
