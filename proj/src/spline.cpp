#include "kanppo/spline.hpp"

#include <cstring>

#include "kanppo/errors.hpp"

namespace kanppo {

KnotGrid KnotGrid::uniform(int order, int intervals, double lo, double hi) {
  if (order < 0) throw ConfigError("KnotGrid: order must be >= 0");
  if (intervals < 1) throw ConfigError("KnotGrid: intervals must be >= 1");
  if (!(lo < hi)) throw ConfigError("KnotGrid: lo must be < hi");
  KnotGrid g;
  g.order = order;
  g.intervals = intervals;
  g.lo = lo;
  g.hi = hi;
  const double step = (hi - lo) / intervals;
  g.knots.resize(static_cast<std::size_t>(intervals + 2 * order + 1));
  for (int i = 0; i < static_cast<int>(g.knots.size()); ++i) {
    g.knots[static_cast<std::size_t>(i)] = lo + (i - order) * step;
  }
  // Anchor the domain bounds exactly regardless of rounding in the loop.
  g.knots[static_cast<std::size_t>(order)] = lo;
  g.knots[static_cast<std::size_t>(order + intervals)] = hi;
  return g;
}

int KnotGrid::span_of(double x) const {
  const int first = order;                  // knots[first] == lo
  const int last = order + intervals - 1;   // last in-domain span
  int span = first;
  while (span < last && x >= knots[static_cast<std::size_t>(span + 1)]) ++span;
  return span;
}

namespace {

// Nonzero basis window N_{span-k .. span} at x (NURBS-book BasisFuns).
// `work` needs 3*(k+1) doubles: N, left, right.
void basis_window(const KnotGrid& grid, int span, double x, double* work) {
  const int k = grid.order;
  double* n = work;
  double* left = work + (k + 1);
  double* right = work + 2 * (k + 1);
  n[0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    left[j] = x - grid.knots[static_cast<std::size_t>(span + 1 - j)];
    right[j] = grid.knots[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
}

}  // namespace

void basis_values(const KnotGrid& grid, double x, std::span<double> out) {
  const int k = grid.order;
  const int n = grid.basis_count();
  if (static_cast<int>(out.size()) != n) {
    throw ConfigError("basis_values: output length must equal g + k");
  }
  std::memset(out.data(), 0, sizeof(double) * out.size());
  const double xc = grid.clamp(x);
  const int span = grid.span_of(xc);
  double work[3 * 16];  // supports order <= 15
  if (k + 1 > 16) throw ConfigError("basis_values: order too large");
  basis_window(grid, span, xc, work);
  for (int r = 0; r <= k; ++r) out[static_cast<std::size_t>(span - k + r)] = work[r];
}

BasisVector basis_values(const KnotGrid& grid, double x) {
  BasisVector out(static_cast<std::size_t>(grid.basis_count()));
  basis_values(grid, x, out);
  return out;
}

void basis_derivatives(const KnotGrid& grid, double x, std::span<double> out) {
  const int k = grid.order;
  if (k < 1) {
    throw ConfigError("basis_derivatives: undefined for degree-0 grids");
  }
  const int n = grid.basis_count();
  if (static_cast<int>(out.size()) != n) {
    throw ConfigError("basis_derivatives: output length must equal g + k");
  }
  std::memset(out.data(), 0, sizeof(double) * out.size());
  const double xc = grid.clamp(x);
  const int span = grid.span_of(xc);

  // dN_{i,k} = k * ( N_{i,k-1}/(t_{i+k}-t_i) - N_{i+1,k-1}/(t_{i+k+1}-t_{i+1}) ),
  // with the degree-(k-1) window N_{span-k+1 .. span} from the same span.
  double work[3 * 16];
  if (k + 1 > 16) throw ConfigError("basis_derivatives: order too large");
  KnotGrid lower = grid;  // same knots, evaluated one degree down
  lower.order = k;        // basis_window uses grid.order via parameter below
  // Reuse basis_window at degree k-1 by temporarily shrinking the order.
  lower.order = k - 1;
  // At degree k-1 over the same knot vector, the nonzero window at this span
  // is N_{span-(k-1) .. span}; basis_window indexes knots relative to span.
  basis_window(lower, span, xc, work);

  const auto& t = grid.knots;
  for (int i = span - k; i <= span; ++i) {
    double d = 0.0;
    // N_{i,k-1} contribution
    if (i >= span - k + 1) {
      const double denom = t[static_cast<std::size_t>(i + k)] - t[static_cast<std::size_t>(i)];
      d += work[i - (span - k + 1)] / denom;
    }
    // N_{i+1,k-1} contribution
    if (i + 1 <= span) {
      const double denom =
          t[static_cast<std::size_t>(i + k + 1)] - t[static_cast<std::size_t>(i + 1)];
      d -= work[i + 1 - (span - k + 1)] / denom;
    }
    out[static_cast<std::size_t>(i)] = k * d;
  }
}

BasisVector basis_derivatives(const KnotGrid& grid, double x) {
  BasisVector out(static_cast<std::size_t>(grid.basis_count()));
  basis_derivatives(grid, x, out);
  return out;
}

double eval_spline(std::span<const double> coeffs, const KnotGrid& grid, double x) {
  const int k = grid.order;
  if (static_cast<int>(coeffs.size()) != grid.basis_count()) {
    throw ConfigError("eval_spline: coefficient length must equal g + k");
  }
  const double xc = grid.clamp(x);
  const int span = grid.span_of(xc);
  double work[3 * 16];
  if (k + 1 > 16) throw ConfigError("eval_spline: order too large");
  basis_window(grid, span, xc, work);
  double acc = 0.0;
  for (int r = 0; r <= k; ++r) acc += coeffs[static_cast<std::size_t>(span - k + r)] * work[r];
  return acc;
}

}  // namespace kanppo
