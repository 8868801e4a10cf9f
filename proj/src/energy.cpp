#include "g2flow/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace g2flow {

EnergyReport energy(const StructureField<double>& sf) {
  sf.require_positive();
  FormField om = sf.omega();
  double td = l2_norm2(sf, d(om));
  double td_theta = l2_norm2(sf, d(sf.theta_field()));
  double td_delta = l2_norm2(sf, codiff_analytic(sf, om));
  if (std::fabs(td_theta - td_delta) >
      1e-10 * (1.0 + td_theta + td_delta))
    throw std::runtime_error(
        "energy: |d theta|^2 and |delta omega|^2 quadratures disagree");
  EnergyReport r;
  r.torsion_d = td;
  r.torsion_delta = td_theta;
  r.dirichlet = 0.5 * (td + td_theta);
  r.hitchin = sf.total_volume();
  return r;
}

FormField laplacian_flow_rhs(const StructureField<double>& sf) {
  sf.require_positive();
  return laplacian(sf, sf.omega(), CodiffKind::analytic);
}

double second_variation(const StructureField<double>& background,
                        const FormField& tdot) {
  background.require_positive();
  FormField om = background.omega();
  double torsion = l2_norm2(background, d(om)) +
                   l2_norm2(background, codiff_analytic(background, om));
  if (torsion > 1e-16 * (1.0 + l2_norm2(background, om)))
    throw std::invalid_argument(
        "second variation needs a torsion-free background");
  FormField theta_dot =
      hodge_field(background, p_apply_field(background, tdot));
  return l2_norm2(background, d(tdot)) + l2_norm2(background, d(theta_dot));
}

}  // namespace g2flow
