#include "icdmd/dynamics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "icdmd/errors.h"
#include "icdmd/parallel.h"

namespace icdmd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fixed-step RK4 on raw buffers; returns the step index at which the state
// first became non-finite, or -1.
int Rk4(const VectorField& f, std::span<double> x, double h, int steps) {
  const size_t p = x.size();
  std::vector<double> k1(p), k2(p), k3(p), k4(p), tmp(p);
  for (int s = 0; s < steps; ++s) {
    f(x, k1);
    for (size_t i = 0; i < p; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    f(tmp, k2);
    for (size_t i = 0; i < p; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    f(tmp, k3);
    for (size_t i = 0; i < p; ++i) tmp[i] = x[i] + h * k3[i];
    f(tmp, k4);
    bool finite = true;
    for (size_t i = 0; i < p; ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      finite = finite && std::isfinite(x[i]);
    }
    if (!finite) return s;
  }
  return -1;
}

bool InBox(const VectorXd& x, const Box& box) {
  for (size_t i = 0; i < box.size(); ++i) {
    if (x(i) < box[i].lo || x(i) > box[i].hi) return false;
  }
  return true;
}

bool AnyBreakpointIn(const std::vector<double>& bps, double lo, double hi) {
  return std::any_of(bps.begin(), bps.end(),
                     [&](double b) { return b >= lo && b <= hi; });
}

std::optional<int> RawRegion(const OdeSystem& sys, const VectorXd& x) {
  const InvariantPartition& part = sys.partition;
  const auto& bps = part.breakpoints;
  switch (part.kind) {
    case InvariantPartition::Kind::kNone:
      return std::nullopt;
    case InvariantPartition::Kind::kIntervals: {
      if (std::find(bps.begin(), bps.end(), x(0)) != bps.end()) return std::nullopt;
      return static_cast<int>(std::count_if(bps.begin(), bps.end(),
                                            [&](double b) { return b < x(0); }));
    }
    case InvariantPartition::Kind::kAnnuli: {
      const double r = x.norm();
      if (std::find(bps.begin(), bps.end(), r) != bps.end()) return std::nullopt;
      const int idx = static_cast<int>(std::count_if(
                          bps.begin(), bps.end(), [&](double b) { return b < r; })) -
                      1;
      if (idx < 0) return std::nullopt;
      return idx;
    }
    case InvariantPartition::Kind::kBasins: {
      std::vector<double> buf(x.data(), x.data() + x.size());
      const double h = 0.02;
      const int steps = static_cast<int>(std::ceil(part.horizon / h));
      if (Rk4(sys.field, buf, h, steps) >= 0) return std::nullopt;
      const Eigen::Map<const VectorXd> end(buf.data(), x.size());
      Index nearest = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < sys.fixed_points.cols(); ++i) {
        const double dist = (end - sys.fixed_points.col(i)).norm();
        if (dist < best) {
          best = dist;
          nearest = i;
        }
      }
      if (best > 0.05) return std::nullopt;
      for (size_t r = 0; r < part.attractors.size(); ++r) {
        if (part.attractors[r] == nearest) return static_cast<int>(r);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

VectorXd OdeSystem::Evaluate(const VectorXd& state) const {
  if (state.size() != dim) throw ArgumentError("state dimension mismatch for " + name);
  VectorXd dx(dim);
  field(std::span<const double>(state.data(), dim), std::span<double>(dx.data(), dim));
  return dx;
}

std::optional<int> OdeSystem::Region(const VectorXd& state) const {
  if (!partition.window.empty() && !InBox(state, partition.window)) {
    return std::nullopt;
  }
  return RawRegion(*this, state);
}

std::optional<int> OdeSystem::CellRegion(const Box& cell) const {
  VectorXd center(dim);
  for (int i = 0; i < dim; ++i) center(i) = 0.5 * (cell[i].lo + cell[i].hi);
  switch (partition.kind) {
    case InvariantPartition::Kind::kNone:
      return std::nullopt;
    case InvariantPartition::Kind::kIntervals:
      if (AnyBreakpointIn(partition.breakpoints, cell[0].lo, cell[0].hi)) {
        return std::nullopt;
      }
      return RawRegion(*this, center);
    case InvariantPartition::Kind::kAnnuli: {
      VectorXd nearest(dim), farthest(dim);
      for (int i = 0; i < dim; ++i) {
        nearest(i) = std::clamp(0.0, cell[i].lo, cell[i].hi);
        farthest(i) = std::max(std::abs(cell[i].lo), std::abs(cell[i].hi));
      }
      if (AnyBreakpointIn(partition.breakpoints, nearest.norm(), farthest.norm())) {
        return std::nullopt;
      }
      return RawRegion(*this, center);
    }
    case InvariantPartition::Kind::kBasins: {
      constexpr int kStencil = 5;
      Index total = 1;
      for (int i = 0; i < dim; ++i) total *= kStencil;
      std::optional<int> label;
      for (Index flat = 0; flat < total; ++flat) {
        VectorXd pt(dim);
        Index rest = flat;
        for (int i = 0; i < dim; ++i) {
          const int k = static_cast<int>(rest % kStencil);
          rest /= kStencil;
          pt(i) = cell[i].lo + (cell[i].hi - cell[i].lo) * k / (kStencil - 1);
        }
        const std::optional<int> here = RawRegion(*this, pt);
        if (!here || (label && *label != *here)) return std::nullopt;
        label = here;
      }
      return label;
    }
  }
  return std::nullopt;
}

void SamplingPlan::Check() const {
  if (bounds.empty() || bounds.size() != counts.size()) {
    throw ArgumentError("sampling plan needs one count per bounded dimension");
  }
  for (size_t i = 0; i < bounds.size(); ++i) {
    if (!(bounds[i].lo < bounds[i].hi)) {
      throw ArgumentError("sampling bounds must satisfy lo < hi");
    }
    if (counts[i] < 2) throw ArgumentError("sampling counts must be >= 2");
  }
  if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("time step k must be positive");
  if (substeps < 1) throw ArgumentError("substeps must be >= 1");
}

Index SamplingPlan::size() const {
  Index n = 1;
  for (int c : counts) {
    if (c > 0 && n > kMaxGridPoints / c) return kMaxGridPoints + 1;
    n *= c;
  }
  return n;
}

VectorXd Flow(const OdeSystem& sys, const VectorXd& state, double k,
              int substeps) {
  if (substeps < 1) throw ArgumentError("substeps must be >= 1");
  if (state.size() != sys.dim) throw ArgumentError("state dimension mismatch");
  VectorXd x = state;
  const int bad = Rk4(sys.field, std::span<double>(x.data(), x.size()),
                      k / substeps, substeps);
  if (bad >= 0) {
    std::ostringstream os;
    os << "integration of " << sys.name << " from (" << state.transpose()
       << ") produced a non-finite state at step " << bad;
    throw IntegrationError(os.str());
  }
  return x;
}

OdeSystem Builtin(const std::string& name) {
  OdeSystem sys;
  sys.name = name;
  if (name == "cubic_multistable" || name == "cubic_halfstable") {
    sys.dim = 1;
    if (name == "cubic_multistable") {
      sys.field = [](std::span<const double> x, std::span<double> dx) {
        dx[0] = -(x[0] + 0.5) * (x[0] - 0.2) * (x[0] - 0.7);
      };
    } else {
      sys.field = [](std::span<const double> x, std::span<double> dx) {
        const double u = x[0] - 0.2;
        dx[0] = (x[0] + 0.5) * u * u * (x[0] - 0.7);
      };
    }
    sys.fixed_points = Eigen::RowVector3d(-0.5, 0.2, 0.7);
    sys.fixed_point_labels = {"x*=-0.5", "x*=0.2", "x*=0.7"};
    sys.partition.kind = InvariantPartition::Kind::kIntervals;
    sys.partition.breakpoints = {-0.5, 0.2, 0.7};
    sys.partition.region_names = {"(-inf,-0.5)", "(-0.5,0.2)", "(0.2,0.7)",
                                  "(0.7,inf)"};
    return sys;
  }
  if (name == "duffing") {
    sys.dim = 2;
    sys.field = [](std::span<const double> x, std::span<double> dx) {
      dx[0] = x[1];
      dx[1] = -x[1] + x[0] - 36.0 * x[0] * x[0] * x[0];
    };
    sys.fixed_points.resize(2, 3);
    sys.fixed_points << -1.0 / 6.0, 0.0, 1.0 / 6.0, 0.0, 0.0, 0.0;
    sys.fixed_point_labels = {"x*=(-1/6,0)", "x*=(0,0)", "x*=(1/6,0)"};
    sys.partition.kind = InvariantPartition::Kind::kBasins;
    sys.partition.attractors = {0, 2};
    sys.partition.horizon = 20.0;
    sys.partition.region_names = {"basin(-1/6,0)", "basin(1/6,0)"};
    sys.partition.window = {{-0.4, 0.4}, {-1.0, 1.0}};
    return sys;
  }
  if (name == "polar_limit_cycles") {
    sys.dim = 2;
    sys.field = [](std::span<const double> x, std::span<double> dx) {
      const double r = std::hypot(x[0], x[1]);
      const double g = (r - 1.0 / 3.0) * (r - 2.0 / 3.0);
      dx[0] = g * x[0] - kTwoPi * x[1];
      dx[1] = g * x[1] + kTwoPi * x[0];
    };
    sys.fixed_points = Eigen::Vector2d::Zero();
    sys.fixed_point_labels = {"r*=0"};
    sys.cycles = {{1.0 / 3.0, kTwoPi, "r*=1/3"}, {2.0 / 3.0, kTwoPi, "r*=2/3"}};
    sys.partition.kind = InvariantPartition::Kind::kAnnuli;
    sys.partition.breakpoints = {0.0, 1.0 / 3.0, 2.0 / 3.0};
    sys.partition.region_names = {"0<r<1/3", "1/3<r<2/3", "r>2/3"};
    return sys;
  }
  throw ArgumentError("unknown system '" + name + "'");
}

std::vector<std::string> BuiltinNames() {
  return {"cubic_multistable", "cubic_halfstable", "duffing",
          "polar_limit_cycles"};
}

StateMatrix PeriodicOrbit(const OdeSystem& sys, size_t cycle_index, double k,
                          double phase) {
  if (cycle_index >= sys.cycles.size()) {
    throw UnsupportedError("system " + sys.name + " has no analytic cycle #" +
                           std::to_string(cycle_index));
  }
  if (sys.dim != 2) throw UnsupportedError("analytic cycles are planar only");
  const KnownCycle& cycle = sys.cycles[cycle_index];
  const double turns_per_step = cycle.angular_rate * k / kTwoPi;
  int period = 0;
  for (int q = 1; q <= 10000; ++q) {
    const double turns = turns_per_step * q;
    if (std::abs(turns - std::round(turns)) < 1e-9 && std::round(turns) >= 1) {
      period = q;
      break;
    }
  }
  if (period == 0) {
    throw UnsupportedError("time step does not sample cycle " + cycle.label +
                           " periodically");
  }
  StateMatrix orbit(2, period);
  for (int j = 0; j < period; ++j) {
    const double angle = phase + j * cycle.angular_rate * k;
    orbit(0, j) = cycle.radius * std::cos(angle);
    orbit(1, j) = cycle.radius * std::sin(angle);
  }
  return orbit;
}

StateMatrix SampleGrid(const SamplingPlan& plan) {
  plan.Check();
  const Index n = plan.size();
  if (n > kMaxGridPoints) {
    throw ArgumentError("sampling grid exceeds the cap of " +
                        std::to_string(kMaxGridPoints) + " points");
  }
  const int p = static_cast<int>(plan.bounds.size());
  StateMatrix pts(p, n);
  for (Index j = 0; j < n; ++j) {
    Index rest = j;
    for (int i = 0; i < p; ++i) {
      const int c = plan.counts[i];
      const Index idx = rest % c;
      rest /= c;
      const Interval& b = plan.bounds[i];
      pts(i, j) = b.lo + (static_cast<double>(idx) + 0.5) * b.width() / c;
    }
  }
  return pts;
}

DataMatrices BuildDataMatrices(const Dictionary& dict, const OdeSystem& sys,
                               const SamplingPlan& plan, EscapePolicy policy) {
  if (dict.dim() != sys.dim) {
    throw ArgumentError("dictionary and system dimensions disagree");
  }
  const StateMatrix states = SampleGrid(plan);
  const Index n = states.cols();
  StateMatrix images(sys.dim, n);
  ParallelFor(n, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t j = begin; j < end; ++j) {
      try {
        images.col(j) = Flow(sys, states.col(j), plan.k, plan.substeps);
      } catch (const IntegrationError&) {
        if (policy == EscapePolicy::kError) throw;
        images.col(j).setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    }
  });

  std::vector<Index> keep;
  keep.reserve(n);
  for (Index j = 0; j < n; ++j) {
    if (!dict.Contains(states.col(j))) {
      throw ArgumentError("sample " + std::to_string(j) +
                          " lies outside the dictionary domain");
    }
    if (dict.Contains(images.col(j))) {
      keep.push_back(j);
      continue;
    }
    switch (policy) {
      case EscapePolicy::kClamp:
        if (!images.col(j).allFinite()) {
          throw IntegrationError("image of sample " + std::to_string(j) +
                                 " is non-finite and cannot be clamped");
        }
        for (int i = 0; i < sys.dim; ++i) {
          images(i, j) = std::clamp(images(i, j), dict.bounds()[i].lo,
                                    dict.bounds()[i].hi);
        }
        keep.push_back(j);
        break;
      case EscapePolicy::kDropColumn:
        break;
      case EscapePolicy::kError: {
        std::ostringstream os;
        os << "image of sample " << j << " (" << images.col(j).transpose()
           << ") escapes the dictionary domain";
        throw ArgumentError(os.str());
      }
    }
  }

  DataMatrices data;
  data.states = states(Eigen::all, keep);
  data.images = images(Eigen::all, keep);
  data.dropped = n - static_cast<Index>(keep.size());
  data.x = dict.Evaluate(data.states);
  data.y = dict.Evaluate(data.images);
  return data;
}

}  // namespace icdmd
