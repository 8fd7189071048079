#include "telecert/protocols.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace telecert {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kWzMin = 0.5773502691896258;  // 1/sqrt(3)

int sgn(double x) { return x >= 0.0 ? +1 : -1; }  // sgn(0) = +1

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must lie in [0, 1]");
}

void check_wz(double wz) {
  if (!(wz > kWzMin && wz <= 1.0))
    throw std::invalid_argument("wz must lie in (1/sqrt(3), 1]");
}

/// Eq-(5)-form distribution P = (1/8)[1 + beta V_c.b] from the four
/// conditional vectors V_c.
OutcomeDistribution linear_model_distribution(const std::array<Vec3, 4>& v,
                                              const Vec3& b) {
  OutcomeDistribution d;
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      const double x = v[2 * c0 + c1].dot(b);
      d(c0, c1, +1) = 0.125 * (1.0 + x);
      d(c0, c1, -1) = 0.125 * (1.0 - x);
    }
  }
  return d;
}

bool lowfid_matches(const Vec3& a, double tol) {
  return (a - Vec3::UnitX()).norm() <= tol || (a - Vec3::UnitY()).norm() <= tol;
}

Outcome sample_from_distribution(const OutcomeDistribution& d, RngState& rng) {
  double u = rng.uniform();
  for (int c0 = 0; c0 < 2; ++c0)
    for (int c1 = 0; c1 < 2; ++c1)
      for (int beta : {-1, +1}) {
        u -= d(c0, c1, beta);
        if (u < 0.0) return {c0, c1, beta};
      }
  return {1, 1, +1};  // u landed in the rounding slack of the last cell
}

}  // namespace

OutcomeDistribution ideal_distribution(const Vec3& a, const Vec3& b,
                                       double lambda) {
  require_unit(a, "a");
  require_unit(b, "b");
  check_lambda(lambda);
  std::array<Vec3, 4> v;
  for (int i = 0; i < 4; ++i)
    v[i] = lambda * (rotation_matrix(i >> 1, i & 1) * a);
  return linear_model_distribution(v, b);
}

OutcomeDistribution gisin_distribution(const Vec3& a, const Vec3& b) {
  require_unit(a, "a");
  require_unit(b, "b");
  const Sector s = sector_of(a);
  const double x = tetra_center(0, 0).dot(b);
  OutcomeDistribution d;
  d(s.i, s.j, +1) = 0.5 * (1.0 + x);
  d(s.i, s.j, -1) = 0.5 * (1.0 - x);
  return d;
}

OutcomeDistribution gisin_hashed_distribution(const Vec3& a, const Vec3& b) {
  require_unit(a, "a");
  require_unit(b, "b");
  const Sector s = sector_of(a);
  OutcomeDistribution d;
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      // Shared-bit average: the hash r reaching output (c0, c1) is c XOR s,
      // and Bob's box holds t_r for that r.
      const double x = tetra_center(c0 ^ s.i, c1 ^ s.j).dot(b);
      d(c0, c1, +1) = 0.125 * (1.0 + x);
      d(c0, c1, -1) = 0.125 * (1.0 - x);
    }
  }
  return d;
}

OutcomeDistribution lowfid_distribution(const Vec3& a, const Vec3& b,
                                        double tol) {
  require_unit(a, "a");
  require_unit(b, "b");
  if (lowfid_matches(a, tol)) return ideal_distribution(a, b, 1.0);
  OutcomeDistribution d;
  d.p.fill(0.125);
  return d;
}

Vec3 pcrit_map(const Vec3& a, double wz) {
  check_wz(wz);
  const Vec3 caps(kSqrt2 - wz, kSqrt2 - wz, wz);

  auto worst_violator = [&caps](const Vec3& v, const bool active[3]) {
    int worst = -1;
    double excess = 1e-15;  // lexicographic lowest axis wins exact ties
    for (int k = 0; k < 3; ++k) {
      if (active[k]) continue;
      const double e = std::abs(v[k]) - caps[k];
      if (e > excess) {
        worst = k;
        excess = e;
      }
    }
    return worst;
  };

  bool active[3] = {false, false, false};
  Vec3 m = a;
  int next = worst_violator(m, active);
  if (next < 0) return a;  // free region: the map is the identity, exactly

  while (next >= 0) {
    active[next] = true;
    m[next] = sgn(a[next]) * caps[next];

    double fixed_sq = 0.0;
    for (int k = 0; k < 3; ++k)
      if (active[k]) fixed_sq += caps[k] * caps[k];
    const double free_norm = std::sqrt(std::max(0.0, 1.0 - fixed_sq));

    // Put the remaining norm on the free axes, keeping their direction.
    double fn_sq = 0.0;
    for (int k = 0; k < 3; ++k)
      if (!active[k]) fn_sq += a[k] * a[k];
    if (fn_sq < 1e-24) {
      // Input sits exactly on the capped axes; spread the residual over the
      // free axes in cyclic order starting after the last capped axis.
      int last = 0;
      for (int k = 0; k < 3; ++k)
        if (active[k]) last = k;
      double left_sq = free_norm * free_norm;
      for (int step = 1; step <= 3; ++step) {
        const int k = (last + step) % 3;
        if (active[k]) continue;
        const double put = std::min(std::sqrt(std::max(0.0, left_sq)), caps[k]);
        m[k] = put;
        left_sq -= put * put;
      }
    } else {
      const double scale = free_norm / std::sqrt(fn_sq);
      for (int k = 0; k < 3; ++k)
        if (!active[k]) m[k] = a[k] * scale;
    }
    next = worst_violator(m, active);
  }
  return m;
}

OutcomeDistribution pcrit_distribution(const Vec3& a, const Vec3& b,
                                       double wz) {
  require_unit(a, "a");
  require_unit(b, "b");
  const Vec3 teleported = pcrit_map(a, wz);
  std::array<Vec3, 4> v;
  for (int i = 0; i < 4; ++i)
    v[i] = rotation_matrix(i >> 1, i & 1) * teleported;
  return linear_model_distribution(v, b);
}

Outcome gisin_frame_randomized_sample(const Vec3& a, const Vec3& b,
                                      RngState& rng, Vec3* bob_hidden) {
  require_unit(a, "a");
  require_unit(b, "b");
  const Mat3 frame = random_rotation_matrix(rng);
  // Sector of a against the rotated centers, lexicographic tie-break.
  int best_i = 0, best_j = 0;
  double best_dot = a.dot(frame * tetra_center(0, 0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (i == 0 && j == 0) continue;
      const double d = a.dot(frame * tetra_center(i, j));
      if (d > best_dot) {
        best_i = i;
        best_j = j;
        best_dot = d;
      }
    }
  const Vec3 w = frame * tetra_center(0, 0);
  if (bob_hidden) *bob_hidden = w;
  const double p_plus = 0.5 * (1.0 + b.dot(w));
  const int beta = rng.uniform() < p_plus ? +1 : -1;
  return {best_i, best_j, beta};
}

Outcome toner_bacon_active_sample(const Vec3& a, const Vec3& b,
                                  RngState& rng) {
  require_unit(a, "a");
  require_unit(b, "b");
  const Vec3 l1 = sample_uniform_sphere(rng);
  const Vec3 l2 = sample_uniform_sphere(rng);
  const int s1 = sgn(a.dot(l1));
  const int alpha = -s1;
  const int c = s1 * sgn(a.dot(l2));
  const int beta = -alpha * sgn(b.dot(l1 + static_cast<double>(c) * l2));
  return {(1 - alpha) / 2, (1 - c) / 2, beta};
}

// ---- Protocol --------------------------------------------------------------

Protocol Protocol::ideal(double lambda) {
  check_lambda(lambda);
  Protocol p(ProtocolKind::Ideal);
  p.lambda_ = lambda;
  return p;
}

Protocol Protocol::gisin() { return Protocol(ProtocolKind::Gisin); }

Protocol Protocol::gisin_hashed() {
  return Protocol(ProtocolKind::GisinHashed);
}

Protocol Protocol::gisin_frame_randomized() {
  return Protocol(ProtocolKind::GisinFrameRandomized);
}

Protocol Protocol::lowfid(double tol) {
  Protocol p(ProtocolKind::LowFidHighChsh);
  p.lowfid_tol_ = tol;
  return p;
}

Protocol Protocol::pcrit(double wz) {
  check_wz(wz);
  Protocol p(ProtocolKind::PCrit);
  p.wz_ = wz;
  return p;
}

Protocol Protocol::toner_bacon_active() {
  return Protocol(ProtocolKind::TonerBaconActive);
}

Protocol Protocol::parse(const std::string& id) {
  const auto colon = id.find(':');
  const std::string name = id.substr(0, colon);
  std::string params = colon == std::string::npos ? "" : id.substr(colon + 1);

  auto param_value = [&](const char* key) -> double {
    const std::string prefix = std::string(key) + "=";
    if (params.rfind(prefix, 0) != 0)
      throw std::invalid_argument("protocol '" + name + "' expects " + prefix +
                                  "<value>, got '" + id + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(params.substr(prefix.size()), &used);
      if (prefix.size() + used != params.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad numeric parameter in '" + id + "'");
    }
  };

  if (name == "ideal")
    return ideal(params.empty() ? 1.0 : param_value("lambda"));
  if (name == "gisin" && params.empty()) return gisin();
  if (name == "gisin-hashed" && params.empty()) return gisin_hashed();
  if (name == "gisin-frame" && params.empty()) return gisin_frame_randomized();
  if (name == "lowfid" && params.empty()) return lowfid();
  if (name == "pcrit")
    return pcrit(params.empty() ? 1.0 / kSqrt2 : param_value("wz"));
  if (name == "toner-bacon" && params.empty()) return toner_bacon_active();
  throw std::invalid_argument("unknown protocol id '" + id + "'");
}

std::string Protocol::id() const {
  char buf[64];
  switch (kind_) {
    case ProtocolKind::Ideal:
      std::snprintf(buf, sizeof buf, "ideal:lambda=%.12g", lambda_);
      return buf;
    case ProtocolKind::Gisin:
      return "gisin";
    case ProtocolKind::GisinHashed:
      return "gisin-hashed";
    case ProtocolKind::GisinFrameRandomized:
      return "gisin-frame";
    case ProtocolKind::LowFidHighChsh:
      return "lowfid";
    case ProtocolKind::PCrit:
      std::snprintf(buf, sizeof buf, "pcrit:wz=%.12g", wz_);
      return buf;
    case ProtocolKind::TonerBaconActive:
      return "toner-bacon";
  }
  return "?";
}

CompensationMode Protocol::compensation_mode() const {
  return kind_ == ProtocolKind::TonerBaconActive
             ? CompensationMode::ActiveCompensation
             : CompensationMode::Separated;
}

bool Protocol::has_exact() const {
  switch (kind_) {
    case ProtocolKind::GisinFrameRandomized:
    case ProtocolKind::TonerBaconActive:
      return false;
    default:
      return true;
  }
}

bool Protocol::has_sampling() const { return true; }

bool Protocol::has_compensated_map() const {
  switch (kind_) {
    case ProtocolKind::GisinFrameRandomized:
    case ProtocolKind::TonerBaconActive:
      return false;
    default:
      return true;
  }
}

Vec3 Protocol::compensated_map(const Vec3& a) const {
  switch (kind_) {
    case ProtocolKind::Ideal:
      return lambda_ * a;
    case ProtocolKind::Gisin:
    case ProtocolKind::GisinHashed:
      // R_c V_c equals the center of a's sector for every output cell.
      return sector_of(a).center;
    case ProtocolKind::LowFidHighChsh:
      return lowfid_matches(a, lowfid_tol_) ? a : Vec3::Zero();
    case ProtocolKind::PCrit:
      return pcrit_map(a, wz_);
    default:
      throw std::logic_error("protocol has no compensated map");
  }
}

OutcomeDistribution Protocol::exact_distribution(const Vec3& a,
                                                 const Vec3& b) const {
  switch (kind_) {
    case ProtocolKind::Ideal:
      return ideal_distribution(a, b, lambda_);
    case ProtocolKind::Gisin:
      return gisin_distribution(a, b);
    case ProtocolKind::GisinHashed:
      return gisin_hashed_distribution(a, b);
    case ProtocolKind::LowFidHighChsh:
      return lowfid_distribution(a, b, lowfid_tol_);
    case ProtocolKind::PCrit:
      return pcrit_distribution(a, b, wz_);
    default:
      throw std::logic_error("protocol '" + id() +
                             "' has no exact distribution");
  }
}

Outcome Protocol::sample(const Vec3& a, const Vec3& b, RngState& rng,
                         Vec3* bob_hidden) const {
  switch (kind_) {
    case ProtocolKind::GisinFrameRandomized:
      return gisin_frame_randomized_sample(a, b, rng, bob_hidden);
    case ProtocolKind::TonerBaconActive:
      return toner_bacon_active_sample(a, b, rng);
    case ProtocolKind::Gisin: {
      if (bob_hidden) *bob_hidden = tetra_center(0, 0);
      return sample_from_distribution(exact_distribution(a, b), rng);
    }
    case ProtocolKind::GisinHashed: {
      const std::uint64_t bits = rng.next();
      const int r0 = static_cast<int>(bits & 1);
      const int r1 = static_cast<int>((bits >> 1) & 1);
      const Sector s = sector_of(a);
      const Vec3& w = tetra_center(r0, r1);
      if (bob_hidden) *bob_hidden = w;
      const double p_plus = 0.5 * (1.0 + b.dot(w));
      const int beta = rng.uniform() < p_plus ? +1 : -1;
      return {s.i ^ r0, s.j ^ r1, beta};
    }
    default:
      return sample_from_distribution(exact_distribution(a, b), rng);
  }
}

}  // namespace telecert
