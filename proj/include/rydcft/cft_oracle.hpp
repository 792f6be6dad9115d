#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rydcft {

struct Rational {
  long num = 0;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;  // "3/2", "0", "2"
  friend bool operator==(const Rational&, const Rational&) = default;
};
Rational make_rational(long num, long den);
Rational operator+(const Rational& a, const Rational& b);
Rational operator/(const Rational& a, const Rational& b);

enum class ChainParity { odd_L, even_L };
enum class FermionSector { even_fermion, odd_fermion };
enum class BoundaryCondition { ising_fixed_pp, ising_fixed_pm, ising_free, tci_free, tci_intermediate, tci_fixed };

ChainParity chain_parity_of(int L);
std::string to_string(BoundaryCondition bc);
BoundaryCondition boundary_condition_from_string(const std::string& s);

struct CftLevel {
  std::string primary;  // I, sigma, epsilon, sigma', epsilon', epsilon''
  int J = 0;
  Rational normalized_energy;  // E L / (pi hbar v), c/24 offset dropped
  int parity = 1;              // reflection eigenvalue relative to the ground state
  std::optional<std::vector<int>> occupation;  // Ising fermion modes
};

struct FermionMode {
  int n = 0;
  double momentum(int L) const;                   // (pi/L)(n + 1/2)
  double energy(int L, double v) const { return v * momentum(L); }
};

// Free-Majorana tower: fillings with the sector's fermion-number parity, sorted by energy.
std::vector<CftLevel> ising_levels(ChainParity parity, FermionSector sector, std::size_t count);
// Tabulated tricritical-Ising levels (four per boundary condition and chain parity).
std::vector<CftLevel> tci_levels(BoundaryCondition bc, ChainParity parity, std::size_t count);

// Table-style rows: levels with equal energy merged, occupations joined ("{0,3}, {1,2}").
struct LevelRow {
  std::string label;
  Rational normalized_energy;
  int parity;
};
std::vector<LevelRow> merge_rows(const std::vector<CftLevel>& levels);
void write_levels_csv(std::ostream& os, const std::vector<CftLevel>& levels);

// Gap ratios (E_i - E_0)/(E_1 - E_0) restricted to a parity (0 = any) and excluding the ground level.
std::vector<double> oracle_gap_ladder(const std::vector<CftLevel>& levels, int parity_filter);

// Chiral scaling dimensions of the primaries.
std::vector<std::pair<std::string, Rational>> tci_primaries();
std::vector<std::pair<std::string, Rational>> ising_primaries();

// {sinc[(k - (k_a - k_b)) L/2] + P (a <-> b)}^2 with the reflection selection rule.
double sinc_matrix_element(double k, double alpha, int a, int b, int L);

enum class DsfField { epsilon, sigma };
// Light-cone structure factor shapes (unit prefactor); zero below the light cone.
double dsf_prediction(DsfField field, double k, double omega, double v);

struct CombLine {
  double omega;  // angular position
  double weight;
};
// k = 0 delta combs: periodic lines at (2m+1) pi v / L, open-chain lines at 2(m+1) pi v / L.
std::vector<CombLine> dsf_comb(bool periodic, double v, int L, int lines);

struct VelocityFit {
  double v = 0.0;
  double sigma = 0.0;
  double intercept = 0.0;
};
// v = 2 pi |d f_th / d k| from a least-squares line through (k, f_th [MHz]).
VelocityFit light_cone_velocity(const std::vector<double>& k, const std::vector<double>& f_th);

}  // namespace rydcft
