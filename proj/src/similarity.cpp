#include "semalloc/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace semalloc {

namespace {

constexpr char kCornerCell[] = "snr_db\\O";
// Guards the SNR floor against representation error in computed SNRs.
constexpr double kSnrFloorSlackDb = 1e-9;

bool strictly_ascending(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) ==
         v.end();
}

std::vector<double> uniform_grid(double lo, double hi, double step, const char* what) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw TableError(fmt::format("bad {} grid: [{}, {}] step {}", what, lo, hi, step));
  }
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    // snap to 1e-9 so that grids survive a 6-decimal round trip exactly
    g[i] = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
  }
  return g;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void fill_row(std::vector<double>& xi, std::size_t r, const std::vector<double>& snr_grid,
              const std::vector<double>& o_grid, const SurrogateParams& p) {
  const std::size_t cols = o_grid.size();
  for (std::size_t c = 0; c < cols; ++c) xi[r * cols + c] = surrogate_xi(o_grid[c], snr_grid[r], p);
}

}  // namespace

SimilarityTable::SimilarityTable(std::vector<double> snr_grid_db,
                                 std::vector<double> compression_grid,
                                 std::vector<double> xi_row_major)
    : snr_grid_db_(std::move(snr_grid_db)),
      compression_grid_(std::move(compression_grid)),
      xi_(std::move(xi_row_major)) {
  if (snr_grid_db_.empty() || compression_grid_.empty()) throw TableError("empty grid");
  if (!strictly_ascending(snr_grid_db_) || !strictly_ascending(compression_grid_)) {
    throw TableError("grid not ascending");
  }
  for (double o : compression_grid_) {
    if (!(o > 0.0 && o <= 1.0)) throw TableError("compression rate outside (0, 1]");
  }
  if (xi_.size() != snr_grid_db_.size() * compression_grid_.size()) {
    throw TableError("similarity matrix does not match grid dimensions");
  }
  for (double v : xi_) {
    if (!(v >= 0.0 && v <= 1.0)) throw TableError("similarity out of range");
  }
}

std::size_t SimilarityTable::floor_row(double snr_db) const {
  auto it = std::upper_bound(snr_grid_db_.begin(), snr_grid_db_.end(), snr_db + kSnrFloorSlackDb);
  if (it == snr_grid_db_.begin() || std::isnan(snr_db)) {
    throw TableError(fmt::format("SNR {:.3f} dB below table range (starts at {:.3f} dB)", snr_db,
                                 snr_grid_db_.front()));
  }
  return static_cast<std::size_t>(it - snr_grid_db_.begin()) - 1;
}

std::size_t SimilarityTable::nearest_column(double compression) const {
  auto it = std::lower_bound(compression_grid_.begin(), compression_grid_.end(), compression);
  if (it == compression_grid_.begin()) return 0;
  if (it == compression_grid_.end()) return cols() - 1;
  auto hi = static_cast<std::size_t>(it - compression_grid_.begin());
  return (compression - compression_grid_[hi - 1] <= compression_grid_[hi] - compression) ? hi - 1
                                                                                          : hi;
}

bool SimilarityTable::is_monotone(bool strict) const {
  auto ok = [strict](double before, double after) { return strict ? after < before : after <= before; };
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 1; c < cols(); ++c) {
      if (!ok(at(r, c - 1), at(r, c))) return false;
    }
  }
  for (std::size_t c = 0; c < cols(); ++c) {
    if (compression_grid_[c] >= 1.0) continue;
    for (std::size_t r = 1; r < rows(); ++r) {
      if (!ok(at(r, c), at(r - 1, c))) return false;
    }
  }
  return true;
}

void SurrogateParams::validate() const {
  if (!(compression_power > 0.0)) throw TableError("surrogate compression_power must be positive");
  if (!(snr_scale_db > 0.0)) throw TableError("surrogate snr_scale_db must be positive");
  if (!(floor >= 0.0 && floor < 1.0)) throw TableError("surrogate floor must lie in [0, 1)");
  if (!std::isfinite(snr_midpoint_db)) throw TableError("surrogate snr_midpoint_db must be finite");
}

std::vector<double> GridSpec::snr_grid() const {
  return uniform_grid(snr_min_db, snr_max_db, snr_step_db, "SNR");
}

std::vector<double> GridSpec::compression_grid() const {
  if (!(o_min > 0.0)) throw TableError("compression grid must start above 0");
  if (o_max > 1.0) throw TableError("compression grid must end at or below 1");
  return uniform_grid(o_min, o_max, o_step, "compression");
}

double surrogate_xi(double compression, double snr_db, const SurrogateParams& p) {
  if (!(compression > 0.0 && compression <= 1.0)) {
    throw std::domain_error("surrogate_xi: compression rate outside (0, 1]");
  }
  const double keep = 1.0 - std::pow(compression, p.compression_power);
  return p.floor + (1.0 - p.floor) * keep * logistic((snr_db - p.snr_midpoint_db) / p.snr_scale_db);
}

SimilarityTable generate_table_serial(const std::vector<double>& snr_grid_db,
                                      const std::vector<double>& compression_grid,
                                      const SurrogateParams& params) {
  params.validate();
  std::vector<double> xi(snr_grid_db.size() * compression_grid.size());
  for (std::size_t r = 0; r < snr_grid_db.size(); ++r) {
    fill_row(xi, r, snr_grid_db, compression_grid, params);
  }
  return SimilarityTable(snr_grid_db, compression_grid, std::move(xi));
}

SimilarityTable generate_table(const std::vector<double>& snr_grid_db,
                               const std::vector<double>& compression_grid,
                               const SurrogateParams& params) {
  params.validate();
  std::vector<double> xi(snr_grid_db.size() * compression_grid.size());
  const auto rows = static_cast<std::ptrdiff_t>(snr_grid_db.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    fill_row(xi, static_cast<std::size_t>(r), snr_grid_db, compression_grid, params);
  }
  return SimilarityTable(snr_grid_db, compression_grid, std::move(xi));
}

SimilarityTable default_table() {
  GridSpec grid;
  return generate_table(grid.snr_grid(), grid.compression_grid(), SurrogateParams{});
}

std::string save_table(const SimilarityTable& table) {
  std::string out = kCornerCell;
  for (double o : table.compression_grid()) out += fmt::format(",{:.6f}", o);
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out += fmt::format("{:.6f}", table.snr_grid_db()[r]);
    for (std::size_t c = 0; c < table.cols(); ++c) out += fmt::format(",{:.6f}", table.at(r, c));
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, std::size_t line_no) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
    throw TableError(fmt::format("line {}: non-numeric cell '{}'", line_no, cell));
  }
  return v;
}

}  // namespace

SimilarityTable load_table(std::string_view csv) {
  std::vector<double> snr_grid, o_grid, xi;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    auto nl = csv.find('\n', pos);
    std::string_view line = csv.substr(pos, nl == std::string_view::npos ? csv.npos : nl - pos);
    pos = (nl == std::string_view::npos) ? csv.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (o_grid.empty()) {
      if (cells.front() != kCornerCell) {
        throw TableError(fmt::format("line {}: header must start with '{}'", line_no, kCornerCell));
      }
      if (cells.size() < 2) throw TableError("header has no compression grid");
      for (std::size_t c = 1; c < cells.size(); ++c) o_grid.push_back(parse_cell(cells[c], line_no));
      continue;
    }
    if (cells.size() != o_grid.size() + 1) {
      throw TableError(fmt::format("line {}: ragged row ({} cells, expected {})", line_no,
                                   cells.size(), o_grid.size() + 1));
    }
    snr_grid.push_back(parse_cell(cells[0], line_no));
    for (std::size_t c = 1; c < cells.size(); ++c) xi.push_back(parse_cell(cells[c], line_no));
  }
  if (o_grid.empty()) throw TableError("missing header");
  if (snr_grid.empty()) throw TableError("table has no rows");
  return SimilarityTable(std::move(snr_grid), std::move(o_grid), std::move(xi));
}

SimilarityTable load_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TableError(fmt::format("cannot open table file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return load_table(buf.str());
}

double lookup_xi(const SimilarityTable& table, double snr_db, double compression) {
  return table.at(table.floor_row(snr_db), table.nearest_column(compression));
}

std::vector<TableEntry> candidate_entries(const SimilarityTable& table, double snr_db,
                                          double xi_min, double xi_max) {
  const std::size_t r = table.floor_row(snr_db);
  std::vector<TableEntry> out;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const double v = table.at(r, c);
    if (v >= xi_min && v <= xi_max) out.push_back({v, table.compression_grid()[c]});
  }
  std::sort(out.begin(), out.end(), [](const TableEntry& a, const TableEntry& b) {
    return a.xi != b.xi ? a.xi > b.xi : a.compression > b.compression;
  });
  return out;
}

std::vector<TableEntry> strict_candidates(const SimilarityTable& table, double snr_db,
                                          double target) {
  const std::size_t r = table.floor_row(snr_db);
  std::vector<TableEntry> out;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const double v = table.at(r, c);
    if (v >= target) out.push_back({v, table.compression_grid()[c]});
  }
  std::sort(out.begin(), out.end(), [](const TableEntry& a, const TableEntry& b) {
    return a.xi != b.xi ? a.xi < b.xi : a.compression > b.compression;
  });
  return out;
}

TableEntry row_maximum(const SimilarityTable& table, double snr_db) {
  const std::size_t r = table.floor_row(snr_db);
  TableEntry best{table.at(r, 0), table.compression_grid()[0]};
  for (std::size_t c = 1; c < table.cols(); ++c) {
    const double v = table.at(r, c);
    if (v >= best.xi) best = {v, table.compression_grid()[c]};
  }
  return best;
}

double mse(const ImagePair& pair) {
  const std::size_t n = pair.rows * pair.cols;
  if (pair.source.size() != n || pair.reconstruction.size() != n) {
    throw std::invalid_argument("mse: image shapes differ");
  }
  if (n == 0) throw std::invalid_argument("mse: empty image");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pair.source[i] - pair.reconstruction[i];
    sum += d * d;
  }
  return sum / static_cast<double>(n);
}

double psnr_from_mse(double mse_value, double max_pixel) {
  if (mse_value <= 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(max_pixel * max_pixel / mse_value);
}

double psnr(const ImagePair& pair) { return psnr_from_mse(mse(pair), pair.max_pixel); }

double psnr_to_similarity(double psnr_db, double cap_db) {
  if (std::isinf(psnr_db) && psnr_db > 0) return 1.0;
  return std::clamp(psnr_db / cap_db, 0.0, 1.0);
}

}  // namespace semalloc
