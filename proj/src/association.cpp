#include "pvim/association.hpp"

namespace pvim {

IntervalSet AssociationModel::focal_set(double x, double u) const {
    return IntervalSet(focal_interval(x, u)).intersect(param_space()).intersect(constraint());
}

double AssociationModel::sample(double theta, SeededRng& rng) const {
    const Distribution law = aux_law();
    return generate(theta, pvim::sample(law, rng));
}

}  // namespace pvim
