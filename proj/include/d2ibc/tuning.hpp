#pragma once

// Signals for VRFT: which part of the recorded input the linear controller
// is asked to reproduce.

#include <optional>

#include "d2ibc/dataset.hpp"
#include "d2ibc/invctrl.hpp"
#include "d2ibc/linctrl.hpp"

namespace d2ibc {

enum class LinearInputMode {
  Raw,     // u_lin = recorded input
  Replay,  // u_lin = recorded input minus the nonlinear controller's command
};

struct LinearInputData {
  Matrix u_lin;
  Matrix y;
  int first = 0;  // dataset index of row 0
};

/// Aligned (u_lin, y) pairs for vrft_fit. In replay mode the nonlinear
/// controller is re-run on the data with the virtual reference as target,
///   u_lin_t = u_t - K_nl(q_t, r^v_{t+1}, u_{t-1}),
/// which is defined for t = max(n-1, 1) .. L-3.
inline LinearInputData linear_input_data(const DataSet& d, LinearInputMode mode, const ReferenceModel& M,
                                         const PolyModel* f = nullptr, const InversionConfig* cfg = nullptr) {
  if (mode == LinearInputMode::Raw) return {d.u(), d.y(), 0};
  require(f && cfg, ErrorCode::Config, "replay mode needs a model and an inversion config");
  require(f->n_u == d.n_u() && f->n_y == d.n_y(), ErrorCode::Shape, "model and dataset dimensions disagree");
  const Matrix rv = virtual_reference(M, d.y());
  const int first = std::max(f->n - 1, 1);
  const int last = d.L() - 3;
  require(last >= first, ErrorCode::InsufficientData,
          "dataset too short for replay mode (L=" + std::to_string(d.L()) + ")");
  const int rows = last - first + 1;
  LinearInputData out{Matrix(rows, d.n_u()), d.y().middleRows(first, rows), first};
  for (int t = first; t <= last; ++t) {
    const RegressorWindow q = window_at(d, t, f->n);
    const Vector r_next = rv.row(t + 1).transpose();
    const Vector u_prev = d.u().row(t - 1).transpose();
    const Vector u_nl = solve_inversion(*f, q, r_next, u_prev, d.u_bar(), *cfg).u_nl;
    out.u_lin.row(t - first) = d.u().row(t) - u_nl.transpose();
  }
  return out;
}

}  // namespace d2ibc
