#pragma once

// Hand-rolled random generators for property tests.

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mofh6/domain.hpp"

namespace testing {

inline std::string random_code(std::mt19937_64& rng, std::size_t i) {
  static const char* kLetters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::string s;
  std::uniform_int_distribution<int> l(0, 25);
  for (int k = 0; k < 3; ++k) s += kLetters[l(rng)];
  char buf[8];
  std::snprintf(buf, sizeof buf, "%03zu", i % 1000);
  for (char c : std::string(buf)) s += kLetters[c - '0'];
  return s;
}

inline double round_to(double v, double step) { return std::round(v / step) * step; }

// Distinct codes; values on coarse grids so ties and boundary hits occur.
inline std::vector<mofh6::MofRecord> random_records(std::mt19937_64& rng, std::size_t n) {
  using namespace mofh6;
  std::vector<MofRecord> out;
  std::uniform_real_distribution<double> pld(2, 20), dens(0.2, 2.5), vsa(0, 3000), vf(0, 1), len(5, 30);
  static const char* kMetals[] = {"Zn", "Cu", "Co", "Ni", "Zr", "Mn"};
  for (std::size_t i = 0; i < n; ++i) {
    MofRecord r;
    r.ccdc_code = random_code(rng, i);
    r.chemical_name = "compound " + std::to_string(i);
    if (i % 7 == 0) r.abbreviation = "MOF-" + std::to_string(i % 50);
    r.space_group = "P-1";
    r.crystal_system = CrystalSystem::Triclinic;
    r.a = round_to(len(rng), 0.01);
    r.b = round_to(len(rng), 0.01);
    r.c = round_to(len(rng), 0.01);
    r.elements = {{"C", 8}, {"H", 4}, {"O", 4}, {kMetals[i % 6], 1}};
    r.molecular_weight = 200;
    r.pore.pld = round_to(pld(rng), 0.1);
    r.pore.lcd = round_to(r.pore.pld + pld(rng) / 2, 0.1);
    r.pore.density = round_to(dens(rng), 0.001);
    r.pore.vsa = round_to(vsa(rng), 1);
    r.pore.gsa = round_to(vsa(rng), 1);
    r.pore.void_fraction = round_to(vf(rng), 0.01);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace testing
