#pragma once
// Shared fixtures: the cycle Ising toys and values frozen from
// tests/oracle/toy_oracle.py (numpy/scipy brute force, independent of fgs).

#include "fgs/energy.hpp"

#include <cmath>
#include <memory>

namespace toy {

inline constexpr double kBeta = 0.42;

inline std::shared_ptr<const fgs::LogQuadraticEnergy> ring(int n,
                                                           double beta = kBeta) {
  return std::make_shared<fgs::LogQuadraticEnergy>(fgs::LogQuadraticEnergy::cycle(
      fgs::EmbeddingTable::binary_spins(), n, beta));
}

namespace oracle {
inline constexpr double pi3_all_plus = 0.32069333;
inline constexpr double pi3_mixed = 0.05976889;
inline constexpr double mean_energy3 = -0.657529582326;
inline constexpr double pi5_all_plus = 0.1646136;
inline constexpr double mean_energy5 = -0.877041050575;
inline constexpr double pncg_flip_zero_grad = 0.11920292202211755;
inline constexpr double pncg_log_stay_zero_grad = -0.12692801104297263;
inline constexpr double phi_minus_one = 0.15865525393145707;
inline constexpr double phi_one = 0.8413447460685429;

// Unadjusted p-NCG, epsilon = 0.25, p = 2.
struct MixingRow {
  int n;
  double alpha;
  double tv_pi_alpha;
  long long t_mix;
  double bound;
};
inline constexpr MixingRow mixing[] = {
    {3, 0.25, 2.3306e-4, 3195, 39.878518}, {3, 0.5, 1.2565e-2, 59, 0.049949},
    {3, 1.0, 8.5325e-2, 9, -0.592580},     {3, 2.0, 0.19599, 4, -0.656151},
    {5, 0.25, 2.2218e-4, 3837, 2.300856},  {5, 0.5, 1.1856e-2, 71, -0.638310},
    {5, 1.0, 7.5820e-2, 10, -0.685726},    {5, 2.0, 0.15894, 4, -0.690417},
};
inline constexpr long long pncg_mh_t_mix3 = 11;
inline constexpr long long pncg_mh_t_mix5 = 13;

// MUCOLA on the N = 5 toy: TV(stationary, pi) and E[U] under its stationary.
struct MucolaRow {
  double alpha;
  double tv;
  double mean_energy;
};
inline constexpr MucolaRow mucola5[] = {
    {0.1, 0.157568464387, -0.475516887030},
    {0.25, 0.145996198228, -0.509153938658},
    {0.5, 0.134922455506, -0.535513894383},
    {1.0, 0.119842352074, -0.563372079477},
    {1.5, 0.108373357308, -0.584494209569},
    {2.0, 0.110640692470, -0.604269106506},
    {4.0, 0.114882228076, -0.684961434129},
};
}  // namespace oracle

}  // namespace toy
