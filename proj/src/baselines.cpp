#include "playkit/baselines.hpp"

namespace playkit {

// Explicit instantiations for the scalars the project uses.
template double icm_reward<float>(const WorldModel<float>&,
                                  const LatentState<float>&, const Mat<float>&,
                                  const LatentState<float>&);
template double icm_reward<double>(const WorldModel<double>&,
                                   const LatentState<double>&,
                                   const Mat<double>&,
                                   const LatentState<double>&);
template double lexa_objective<float>(const PredictorEnsemble<float>&,
                                      const LatentState<float>&,
                                      const Mat<float>&);
template double lexa_objective<double>(const PredictorEnsemble<double>&,
                                       const LatentState<double>&,
                                       const Mat<double>&);

}  // namespace playkit
