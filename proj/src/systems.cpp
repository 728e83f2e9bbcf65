#include "ifit/systems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ifit/format.hpp"
#include "ifit/parallel.hpp"

namespace ifit {

namespace {

std::string equation_label(const SystemProblem& p, int e) {
  if (static_cast<std::size_t>(e) < p.labels.size() && !p.labels[e].empty()) return p.labels[e];
  return "f" + std::to_string(e + 1);
}

std::string box_text(const Rect& r) {
  std::string s;
  for (std::size_t k = 0; k < r.dim(); ++k) {
    if (k) s += " x ";
    s += "[" + format_double(r.lo(k)) + ", " + format_double(r.hi(k)) + "]";
  }
  return s;
}

void validate_order(const SystemProblem& p, const std::vector<int>& order) {
  const std::size_t m = p.m();
  if (p.equations.size() != m)
    throw Error(std::to_string(p.equations.size()) + " equations for " + std::to_string(m) +
                " dependent variables");
  if (order.size() != m) throw Error("order must assign one equation per dependent variable");
  std::vector<bool> used(m, false);
  for (int e : order) {
    if (e < 0 || static_cast<std::size_t>(e) >= m) throw Error("order refers to equation " + std::to_string(e + 1));
    if (used[e]) throw Error("order uses equation " + std::to_string(e + 1) + " twice");
    used[e] = true;
  }
}

// Later dependent variables solved exactly by nested bisection.
class ExactTail {
public:
  ExactTail(const SystemProblem& p, std::vector<int> order, double tol) : p_(p), order_(std::move(order)), tol_(tol) {
    for (std::size_t i = 0; i < p.m(); ++i) codomain_.push_back(stage_box(p, i).codomain);
  }

  // Fills buf[n + k] for k >= j given x and y_0..y_{j-1}.
  void fill(std::size_t j, std::vector<double>& buf) const {
    if (j >= p_.m()) return;
    buf[p_.n() + j] = solve(j, buf);
    fill(j + 1, buf);
  }

  double value_at(std::size_t j, double y, std::vector<double>& buf) const {
    buf[p_.n() + j] = y;
    fill(j + 1, buf);
    return p_.equations[order_[j]](buf);
  }

private:
  // Sections without a jump continue at the endpoint where |f| is smaller.
  double solve(std::size_t j, std::vector<double>& buf) const {
    const Interval& I = codomain_[j];
    double lo = I.lo, hi = I.hi;
    const double flo = value_at(j, lo, buf);
    const double fhi = value_at(j, hi, buf);
    const int slo = sign_y(flo);
    if (slo == sign_y(fhi)) return std::fabs(flo) <= std::fabs(fhi) ? lo : hi;
    while (hi - lo > tol_) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sign_y(value_at(j, mid, buf)) == slo)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  const SystemProblem& p_;
  std::vector<int> order_;
  double tol_;
  std::vector<Interval> codomain_;
};

// Section field of stage i over (x, y_0..y_i) with exact later values.
ScalarField probe_field(const SystemProblem& p, const std::vector<int>& order, std::size_t i) {
  auto tail = std::make_shared<ExactTail>(p, order, 1e-10);
  const std::size_t total = p.n() + p.m();
  return [tail, i, total, n = p.n()](std::span<const double> pt) {
    std::vector<double> buf(total, 0.0);
    std::copy(pt.begin(), pt.end(), buf.begin());
    return tail->value_at(i, buf[n + i], buf);
  };
}

std::size_t count_violations(const ScalarField& f, const StageBox& box, std::size_t samples, std::size_t scan,
                             std::uint64_t seed) {
  std::size_t bad = 0;
  for (const auto& x : sample_sections(box.domain, samples, seed))
    if (count_sign_changes(f, x, box.codomain, scan) != 1) ++bad;
  return bad;
}

// f_e(x, y_0..y_i, h_{i+1}, ..) with later surrogates called numerically.
ScalarField substituted(const ScalarField& f, std::size_t n, std::size_t m, std::size_t i,
                        std::vector<std::shared_ptr<const CoeffTensor>> later) {
  return [f, n, m, i, later = std::move(later)](std::span<const double> pt) {
    std::vector<double> buf(n + m, 0.0);
    std::copy(pt.begin(), pt.end(), buf.begin());
    for (std::size_t j = i + 1; j < m; ++j) buf[n + j] = later[j]->evaluate(std::span<const double>(buf.data(), n + j));
    return f(buf);
  };
}

}  // namespace

StageBox stage_box(const SystemProblem& p, std::size_t i) {
  if (i >= p.m()) throw Error("stage index out of range");
  const StageSpec* spec = i < p.stages.size() ? &p.stages[i] : nullptr;
  Rect R = p.R;
  if (spec && spec->R) {
    if (spec->R->dim() != p.n()) throw GeometryError("stage " + std::to_string(i + 1) + " R has wrong dimension");
    R = *spec->R;
  }
  Rect I = p.I;
  if (spec && spec->I) {
    if (spec->I->dim() != i + 1)
      throw GeometryError("stage " + std::to_string(i + 1) + " I must cover y1..y" + std::to_string(i + 1));
    I = *spec->I;
  }
  Rect domain = R;
  for (std::size_t k = 0; k < i; ++k) domain = domain.extended(I.side(k));
  StageBox box{domain, I.side(i), domain.center()};
  if (spec && spec->center) {
    if (spec->center->size() != domain.dim())
      throw GeometryError("stage " + std::to_string(i + 1) + " center has wrong dimension");
    box.center = *spec->center;
  }
  return box;
}

OrderCheck check_order(const SystemProblem& p, const std::vector<int>& order, std::size_t samples,
                       std::size_t scan) {
  validate_order(p, order);
  OrderCheck out;
  for (std::size_t i = p.m(); i-- > 0;) {
    const StageBox box = stage_box(p, i);
    const std::size_t bad = count_violations(probe_field(p, order, i), box, samples, scan, p.options.seed);
    if (bad > 0) {
      out.ok = false;
      out.problems.push_back("y" + std::to_string(i + 1) + " from " + equation_label(p, order[i]) + ": " +
                             std::to_string(bad) + " of " + std::to_string(samples) +
                             " sampled sections lack a single jump");
    }
  }
  return out;
}

std::vector<int> choose_order(const SystemProblem& p, std::size_t samples, std::size_t scan) {
  const std::size_t m = p.m();
  if (p.equations.size() != m)
    throw Error(std::to_string(p.equations.size()) + " equations for " + std::to_string(m) +
                " dependent variables");
  std::vector<int> order(m, 0);
  std::vector<bool> used(m, false);
  for (std::size_t i = m; i-- > 0;) {
    const StageBox box = stage_box(p, i);
    std::string summary;
    bool found = false;
    for (std::size_t e = 0; e < m && !found; ++e) {
      if (used[e]) continue;
      order[i] = static_cast<int>(e);
      const std::size_t bad = count_violations(probe_field(p, order, i), box, samples, scan, p.options.seed);
      if (bad == 0) {
        used[e] = true;
        found = true;
      } else {
        summary += "\n  " + equation_label(p, static_cast<int>(e)) + ": " + std::to_string(bad) + " of " +
                   std::to_string(samples) + " sections violate the single-jump condition";
      }
    }
    if (!found) throw NoValidOrder("no equation admits y" + std::to_string(i + 1) + summary);
  }
  return order;
}

EliminationChain eliminate(const SystemProblem& p, const std::vector<int>& order, bool force) {
  validate_order(p, order);
  const std::size_t n = p.n(), m = p.m();
  EliminationChain chain;
  chain.n = n;
  chain.order = order;
  chain.stages.resize(m);
  std::vector<std::shared_ptr<const CoeffTensor>> surrogates(m);
  for (std::size_t i = m; i-- > 0;) {
    const std::string tag = "stage y" + std::to_string(i + 1) + " (" + equation_label(p, order[i]) + ")";
    const StageBox box = stage_box(p, i);
    const StageSpec spec = i < p.stages.size() ? p.stages[i] : StageSpec{};
    if (!spec.N) throw Error(tag + ": no partition count given");
    if (spec.N->size() != n + i)
      throw Error(tag + ": N needs " + std::to_string(n + i) + " entries, got " + std::to_string(spec.N->size()));

    Stage& st = chain.stages[i];
    st.equation = order[i];
    st.variable = static_cast<int>(i);
    st.domain = box.domain;
    st.codomain = box.codomain;
    st.center = box.center;
    try {
      ScalarField field = substituted(p.equations[order[i]], n, m, i, surrogates);
      st.verification = verify_single_jump(field, box.domain, box.codomain, 64, 512, p.options.seed,
                                           p.options.threads);
      if (!st.verification.clean() && !force)
        throw VerificationError(tag + ": " + std::to_string(st.verification.violations.size()) + " of " +
                                std::to_string(st.verification.samples_checked) +
                                " sampled sections lack a single jump");
      FitOptions opt = p.options;
      if (force) opt.clamp = true;
      ImplicitProblem prob = make_problem(field, box.domain, box.codomain, box.center, opt, tag);
      if (spec.analytic) {
        const int N0 = (*spec.N)[0];
        for (std::size_t k = 0; k < spec.N->size(); ++k)
          if ((*spec.N)[k] != N0) throw Error("analytic stages need the same N on every axis");
        st.report = fit_analytic(prob, {N0}).front();
      } else {
        st.report = fit_polynomial(prob, *spec.N);
      }
    } catch (const VerificationError&) {
      throw;
    } catch (const Error& e) {
      throw Error(tag + ": " + e.what());
    }
    st.surrogate = st.report.coeffs;
    surrogates[i] = std::make_shared<const CoeffTensor>(st.surrogate);
  }
  return chain;
}

std::vector<double> compose(const EliminationChain& chain, std::span<const double> x) {
  if (x.size() != chain.n) throw GeometryError("compose point has wrong dimension");
  std::vector<double> buf(x.begin(), x.end());
  for (const Stage& st : chain.stages) buf.push_back(st.surrogate.evaluate(buf));
  return std::vector<double>(buf.begin() + static_cast<std::ptrdiff_t>(chain.n), buf.end());
}

SystemResidual system_residual(const SystemProblem& p, const EliminationChain& chain, int grid_points) {
  if (grid_points <= 0) grid_points = default_validation_points(p.n());
  const auto pts = validation_grid(p.R, grid_points);
  const std::size_t m = p.m();
  std::vector<std::vector<double>> res(pts.size(), std::vector<double>(m));
  std::vector<char> outside(pts.size(), 0);
  parallel_for(pts.size(), p.options.threads, [&](std::size_t i) {
    std::vector<double> full = pts[i];
    const auto y = compose(chain, pts[i]);
    for (std::size_t k = 0; k < m; ++k)
      if (!p.I.side(k).contains(y[k])) outside[i] = 1;
    full.insert(full.end(), y.begin(), y.end());
    for (std::size_t e = 0; e < m; ++e) res[i][e] = std::fabs(p.equations[e](full));
  });
  SystemResidual out;
  out.max_abs.assign(m, 0.0);
  out.points = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.out_of_range += outside[i] ? 1 : 0;
    for (std::size_t e = 0; e < m; ++e)
      if (!(res[i][e] <= out.max_abs[e])) out.max_abs[e] = res[i][e];
  }
  return out;
}

void write_manifest(std::ostream& os, const EliminationChain& chain) {
  os << "order =";
  for (std::size_t i = 0; i < chain.order.size(); ++i) os << (i ? ", " : " ") << (chain.order[i] + 1);
  os << "\n";
  for (std::size_t i = 0; i < chain.stages.size(); ++i) {
    const Stage& st = chain.stages[i];
    os << "[stage " << (i + 1) << "]\n";
    os << "variable = y" << (i + 1) << "\n";
    os << "equation = " << (st.equation + 1) << "\n";
    os << "domain = " << box_text(st.domain) << "\n";
    os << "codomain = [" << format_double(st.codomain.lo) << ", " << format_double(st.codomain.hi) << "]\n";
    os << "center = (" << join(st.center) << ")\n";
    os << "N = " << st.report.N.to_string() << "\n";
    os << "residual_max = " << format_double(st.report.residual_max) << "\n";
    os << "jump_violations = " << st.verification.violations.size() << "\n";
    os << "file = stage" << (i + 1) << "_coefficients.csv\n";
  }
}

}  // namespace ifit
