#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semalloc {

class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretized semantic similarity xi(O, SNR). Rows are SNR grid points (dB),
/// columns compression rates O in (0, 1].
class SimilarityTable {
 public:
  SimilarityTable() = default;
  /// Validates grids (strictly ascending, O in (0,1]) and values (in [0,1]).
  SimilarityTable(std::vector<double> snr_grid_db, std::vector<double> compression_grid,
                  std::vector<double> xi_row_major);

  const std::vector<double>& snr_grid_db() const { return snr_grid_db_; }
  const std::vector<double>& compression_grid() const { return compression_grid_; }
  std::size_t rows() const { return snr_grid_db_.size(); }
  std::size_t cols() const { return compression_grid_.size(); }

  double at(std::size_t snr_index, std::size_t o_index) const {
    return xi_[snr_index * cols() + o_index];
  }
  const double* row(std::size_t snr_index) const { return xi_.data() + snr_index * cols(); }

  /// Index of the largest grid point <= snr_db. Throws TableError
  /// ("below table range") when snr_db is under the first grid point.
  std::size_t floor_row(double snr_db) const;
  /// Index of the grid point nearest to O (lower index on exact ties).
  std::size_t nearest_column(double compression) const;

  /// Rows non-increasing-in-O and columns non-decreasing-in-SNR, strictly
  /// when `strict` (the column at O = 1 is exempt from the SNR check).
  bool is_monotone(bool strict) const;

  bool operator==(const SimilarityTable&) const = default;

 private:
  std::vector<double> snr_grid_db_;
  std::vector<double> compression_grid_;
  std::vector<double> xi_;
};

struct SurrogateParams {
  double compression_power = 2.0;
  double snr_midpoint_db = 5.0;
  double snr_scale_db = 3.0;
  double floor = 0.05;

  void validate() const;
};

struct GridSpec {
  double snr_min_db = -10.0;
  double snr_max_db = 40.0;
  double snr_step_db = 1.0;
  double o_min = 0.05;
  double o_max = 1.0;
  double o_step = 0.05;

  std::vector<double> snr_grid() const;
  std::vector<double> compression_grid() const;
};

/// floor + (1 - floor) * (1 - O^p) * logistic((snr_db - x0) / w).
double surrogate_xi(double compression, double snr_db, const SurrogateParams& params);

/// Rows are filled in parallel when OpenMP is available; the result is
/// bitwise identical to generate_table_serial.
SimilarityTable generate_table(const std::vector<double>& snr_grid_db,
                               const std::vector<double>& compression_grid,
                               const SurrogateParams& params);
SimilarityTable generate_table_serial(const std::vector<double>& snr_grid_db,
                                      const std::vector<double>& compression_grid,
                                      const SurrogateParams& params);
SimilarityTable default_table();

/// CSV: first cell "snr_db\O", header = O grid, one row per SNR point, all
/// values with 6 decimals.
std::string save_table(const SimilarityTable& table);
SimilarityTable load_table(std::string_view csv);
SimilarityTable load_table_file(const std::string& path);

double lookup_xi(const SimilarityTable& table, double snr_db, double compression);

struct TableEntry {
  double xi;
  double compression;
  bool operator==(const TableEntry&) const = default;
};

/// Entries of the floored SNR row with xi_min <= xi <= xi_max, best first
/// (xi descending, larger O first on ties).
std::vector<TableEntry> candidate_entries(const SimilarityTable& table, double snr_db,
                                          double xi_min, double xi_max);

/// Entries of the floored SNR row with xi >= target, nearest first (xi
/// ascending, larger O first on ties). Used when a user's band has collapsed to
/// a single value.
std::vector<TableEntry> strict_candidates(const SimilarityTable& table, double snr_db,
                                          double target);

/// Highest-xi entry of the floored SNR row (larger O on ties).
TableEntry row_maximum(const SimilarityTable& table, double snr_db);

// Image quality metrics.

struct ImagePair {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> source;          // row-major, values in [0, 255]
  std::vector<double> reconstruction;  // same shape
  double max_pixel = 255.0;
};

double mse(const ImagePair& pair);

/// +infinity when the images are identical.
double psnr(const ImagePair& pair);
double psnr_from_mse(double mse_value, double max_pixel = 255.0);

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// Linear map of PSNR onto [0, 1], clamped; infinite PSNR maps to 1.
double psnr_to_similarity(double psnr_db, double cap_db = 50.0);

}  // namespace semalloc
