#include <cmath>
#include <sstream>

#include "mdiff/oracle.hpp"

namespace mdiff {

ErrorReport compare(const std::function<double(const Point&)>& field_a,
                    const std::function<double(const Point&)>& field_b,
                    const std::vector<Point>& probes,
                    const ValidatedSpec* spec) {
  ErrorReport rep;
  for (const auto& x : probes) {
    ProbeError pe;
    pe.x = x;
    if (spec) {
      const auto& ps = spec->spec();
      for (size_t j = 0; j < ps.compartments.size(); ++j) {
        double d = (x - ps.compartments[j].center).norm();
        if (d < 2.0 * ps.epsilon * ps.compartments[j].ell) {
          pe.skipped = true;
          std::ostringstream note;
          note << "probe inside the epsilon-neighbourhood of compartment " << j;
          pe.note = note.str();
          break;
        }
      }
    }
    if (!pe.skipped) {
      pe.a = field_a(x);
      pe.b = field_b(x);
      pe.abs_err = std::fabs(pe.a - pe.b);
      double scale = std::max(std::fabs(pe.a), std::fabs(pe.b));
      pe.rel_err = scale > 0.0 ? pe.abs_err / scale : 0.0;
      rep.max_abs = std::max(rep.max_abs, pe.abs_err);
      rep.max_rel = std::max(rep.max_rel, pe.rel_err);
      rep.mean_abs += pe.abs_err;
      rep.mean_rel += pe.rel_err;
      ++rep.used;
    } else {
      ++rep.skipped;
    }
    rep.probes.push_back(std::move(pe));
  }
  if (rep.used > 0) {
    rep.mean_abs /= rep.used;
    rep.mean_rel /= rep.used;
  }
  return rep;
}

double estimate_order(const std::vector<double>& scales,
                      const std::vector<double>& errors) {
  if (scales.size() != errors.size() || scales.size() < 2)
    throw DomainError("estimate_order needs matching lists of length >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || !(errors[i] > 0.0)) continue;
    double lx = std::log(scales[i]), ly = std::log(errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw DomainError("estimate_order: fewer than 2 usable points");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mdiff
