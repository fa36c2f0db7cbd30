#pragma once

#include "fvg/harness.hpp"
#include "fvg/rng.hpp"

namespace bench {

// One draw of the 250-feature block design with its knockoffs.
struct Instance {
  fvg::Experiment experiment;
  fvg::SyntheticData data;
  fvg::Matrix x_knock;

  explicit Instance(fvg::Index n)
      : experiment(config(n)), data(experiment.synthetic(0)),
        x_knock(fvg::sample_knockoffs(experiment.model(), experiment.s_matrix(), data.data.x,
                                      fvg::derive_seed(1, 0, 1))) {}

  static fvg::ExperimentConfig config(fvg::Index n) {
    fvg::ExperimentConfig c;
    c.n = n;
    return c;
  }
};

inline const Instance& instance(fvg::Index n) {
  static const Instance i500(500), i1000(1000), i2000(2000);
  return n == 500 ? i500 : (n == 2000 ? i2000 : i1000);
}

} // namespace bench
