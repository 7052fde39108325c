// Shared scenario builders for the test suite.
#pragma once

#include "chemostat/scenario.hpp"

namespace testers {

// One species of each family at dilution 0.5 and feed 3. Hand-computed
// landmarks: subsistence levels s_x = 2, s_z = 1 (equilibrium quota 1),
// attached capacity slope c = 1, guild level s_y = 3/2, winner is the quota
// species with the attached species riding along at y = 1, z = 1.
inline chemostat::Scenario canonical() {
    chemostat::Scenario sc;
    sc.D = 0.5;
    sc.s_in = 3.0;
    sc.m_species.push_back({"M", {1.0, 2.0}});
    sc.c_species.push_back({"C", {1.0, 1.0}});
    sc.q_species.push_back({"Q", {1.0, 1.0}, chemostat::DroopGrowth{1.0, 0.5}});
    return sc;
}

inline chemostat::Scenario single_m(double alpha_max = 1.0, double K_s = 1.0,
                                    double D = 0.5, double s_in = 3.0) {
    chemostat::Scenario sc;
    sc.D = D;
    sc.s_in = s_in;
    sc.m_species.push_back({"M", {alpha_max, K_s}});
    return sc;
}

inline chemostat::Scenario single_c(double beta_max = 1.0, double K_s = 1.0,
                                    double D = 0.5, double s_in = 3.0) {
    chemostat::Scenario sc;
    sc.D = D;
    sc.s_in = s_in;
    sc.c_species.push_back({"C", {beta_max, K_s}});
    return sc;
}

inline chemostat::Scenario single_q_droop(double rho_max = 1.0, double K_s = 1.0,
                                          double gamma_bar = 1.0, double Q0 = 0.5,
                                          double D = 0.5, double s_in = 3.0) {
    chemostat::Scenario sc;
    sc.D = D;
    sc.s_in = s_in;
    sc.q_species.push_back({"Q", {rho_max, K_s}, chemostat::DroopGrowth{gamma_bar, Q0}});
    return sc;
}

}  // namespace testers
