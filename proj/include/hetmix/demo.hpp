#ifndef HETMIX_DEMO_HPP
#define HETMIX_DEMO_HPP

#include "hetmix/mixture.hpp"

namespace hetmix {

// Well-separated three-component generator over 20 mixed-type variables
// (16 inputs, 4 outcomes) used by the examples and the acceptance suite.
// `gose_6m` is the component-separating ordinal outcome.
MixtureModel demo_generator();

}  // namespace hetmix

#endif  // HETMIX_DEMO_HPP
