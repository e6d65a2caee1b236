#include "core/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace puon {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    out.emplace_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

// Reads a numeric grid. Blank lines are skipped; every row must have the
// width of the first.
std::vector<std::vector<double>> read_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_fields(line);
    if (fields.empty()) continue;

    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << path.string() << ": line " << line_no << ", column " << c + 1
            << ": not a number: '" << f << "'";
        fail(ErrorCode::kParse, msg.str());
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << path.string() << ": row " << rows.size() + 1 << " (line "
          << line_no << ") has " << row.size() << " values, expected "
          << rows.front().size();
      fail(ErrorCode::kParse, msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::kParse, path.string() + ": empty matrix");
  return rows;
}

}  // namespace

AssociationMatrix::AssociationMatrix(std::size_t n_drugs,
                                     std::size_t n_diseases,
                                     std::vector<std::uint8_t> entries,
                                     std::vector<std::string> drug_ids,
                                     std::vector<std::string> disease_ids)
    : m_(n_drugs),
      n_(n_diseases),
      entries_(std::move(entries)),
      drug_ids_(std::move(drug_ids)),
      disease_ids_(std::move(disease_ids)) {
  if (m_ == 0 || n_ == 0)
    fail(ErrorCode::kShape, "association matrix must be non-empty");
  if (entries_.size() != m_ * n_)
    fail(ErrorCode::kShape, "association entries do not match m*n");
  for (auto v : entries_) {
    if (v > 1) fail(ErrorCode::kValidation, "association entry not in {0,1}");
    ones_ += v;
  }
  if (ones_ == 0)
    fail(ErrorCode::kValidation, "association matrix has no 1-entries");

  if (drug_ids_.empty())
    for (std::size_t i = 0; i < m_; ++i) drug_ids_.push_back(std::to_string(i));
  if (disease_ids_.empty())
    for (std::size_t j = 0; j < n_; ++j)
      disease_ids_.push_back(std::to_string(j));
  if (drug_ids_.size() != m_)
    fail(ErrorCode::kShape, "drug id count " + std::to_string(drug_ids_.size()) +
                                " does not match " + std::to_string(m_) +
                                " drugs");
  if (disease_ids_.size() != n_)
    fail(ErrorCode::kShape,
         "disease id count " + std::to_string(disease_ids_.size()) +
             " does not match " + std::to_string(n_) + " diseases");
}

std::size_t AssociationMatrix::row_sum(std::size_t drug) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += entries_[drug * n_ + j];
  return s;
}

std::vector<Pair> AssociationMatrix::positives() const {
  std::vector<Pair> out;
  out.reserve(ones_);
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (entries_[i * n_ + j])
        out.push_back({static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(j)});
  return out;
}

AssociationMatrix AssociationMatrix::masked(
    const std::vector<Pair>& hidden) const {
  auto e = entries_;
  for (const Pair& p : hidden) e[p.drug * n_ + p.disease] = 0;
  return AssociationMatrix(m_, n_, std::move(e), drug_ids_, disease_ids_);
}

SimilarityMatrix::SimilarityMatrix(std::size_t dim, std::vector<double> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (dim_ == 0) fail(ErrorCode::kShape, "similarity matrix must be non-empty");
  if (entries_.size() != dim_ * dim_)
    fail(ErrorCode::kShape, "similarity entries do not match dim*dim");
  for (std::size_t a = 0; a < dim_; ++a) {
    double row_max = 0.0;
    for (std::size_t b = 0; b < dim_; ++b) {
      const double v = at(a, b);
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << "similarity value " << v << " at (" << a << "," << b
            << ") outside [0,1]";
        fail(ErrorCode::kValidation, msg.str());
      }
      if (std::abs(v - at(b, a)) > kSymmetryTolerance) {
        std::ostringstream msg;
        msg << "similarity matrix not symmetric at (" << a << "," << b << ")";
        fail(ErrorCode::kValidation, msg.str());
      }
      row_max = std::max(row_max, v);
    }
    if (at(a, a) + kSymmetryTolerance < row_max) {
      std::ostringstream msg;
      msg << "similarity row " << a << ": diagonal " << at(a, a)
          << " below row maximum " << row_max;
      fail(ErrorCode::kValidation, msg.str());
    }
  }
}

SimilarityMatrix SimilarityMatrix::identity(std::size_t dim) {
  std::vector<double> e(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) e[i * dim + i] = 1.0;
  return SimilarityMatrix(dim, std::move(e));
}

std::vector<std::string> load_id_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    ids.push_back(fields.front());
  }
  return ids;
}

AssociationMatrix load_association_matrix(
    const std::filesystem::path& path,
    const std::filesystem::path& drug_ids_path,
    const std::filesystem::path& disease_ids_path) {
  const auto rows = read_grid(path);
  const std::size_t m = rows.size();
  const std::size_t n = rows.front().size();
  std::vector<std::uint8_t> e(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = rows[i][j];
      if (v != 0.0 && v != 1.0) {
        std::ostringstream msg;
        msg << path.string() << ": row " << i + 1 << ", column " << j + 1
            << ": value " << v << " is not 0 or 1";
        fail(ErrorCode::kParse, msg.str());
      }
      e[i * n + j] = v == 1.0 ? 1 : 0;
    }
  }
  std::vector<std::string> drug_ids, disease_ids;
  if (!drug_ids_path.empty()) drug_ids = load_id_file(drug_ids_path);
  if (!disease_ids_path.empty()) disease_ids = load_id_file(disease_ids_path);
  return AssociationMatrix(m, n, std::move(e), std::move(drug_ids),
                           std::move(disease_ids));
}

SimilarityMatrix load_similarity_matrix(const std::filesystem::path& path,
                                        std::size_t dim) {
  const auto rows = read_grid(path);
  if (rows.size() != dim || rows.front().size() != dim) {
    std::ostringstream msg;
    msg << path.string() << ": shape " << rows.size() << "x"
        << rows.front().size() << ", expected " << dim << "x" << dim;
    fail(ErrorCode::kShape, msg.str());
  }
  std::vector<double> e;
  e.reserve(dim * dim);
  for (const auto& row : rows) e.insert(e.end(), row.begin(), row.end());
  return SimilarityMatrix(dim, std::move(e));
}

void write_association_matrix(const AssociationMatrix& r,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  for (std::size_t i = 0; i < r.n_drugs(); ++i) {
    for (std::size_t j = 0; j < r.n_diseases(); ++j) {
      if (j) out << ' ';
      out << (r.at(i, j) ? '1' : '0');
    }
    out << '\n';
  }
}

void write_similarity_matrix(const SimilarityMatrix& s,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  char buf[64];
  for (std::size_t a = 0; a < s.dim(); ++a) {
    for (std::size_t b = 0; b < s.dim(); ++b) {
      if (b) out << ' ';
      // Shortest representation that round-trips.
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, s.at(a, b));
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

std::vector<FoldSplit> kfold_split(const AssociationMatrix& r, std::size_t k,
                                   std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::kConfig, "k-fold split needs k >= 2");
  auto pos = r.positives();
  if (k > pos.size())
    fail(ErrorCode::kConfig, "k = " + std::to_string(k) + " exceeds " +
                                 std::to_string(pos.size()) + " positives");
  Rng rng(seed);
  rng.shuffle(pos);

  std::vector<FoldSplit> folds(k);
  for (std::size_t f = 0; f < k; ++f) folds[f].fold_index = f;
  for (std::size_t idx = 0; idx < pos.size(); ++idx)
    folds[idx % k].test_positives.push_back(pos[idx]);

  for (auto& fold : folds) {
    std::sort(fold.test_positives.begin(), fold.test_positives.end());
    fold.masked_matrix = r.masked(fold.test_positives);
    fold.train_positives = fold.masked_matrix.positives();
  }
  return folds;
}

FoldSplit new_drug_split(const AssociationMatrix& r) {
  FoldSplit split;
  for (std::size_t i = 0; i < r.n_drugs(); ++i) {
    if (r.row_sum(i) != 1) continue;
    for (std::size_t j = 0; j < r.n_diseases(); ++j)
      if (r.at(i, j))
        split.test_positives.push_back(
            {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  }
  if (split.test_positives.empty())
    fail(ErrorCode::kEmptyTest, "no drug has exactly one association");
  if (split.test_positives.size() == r.ones())
    fail(ErrorCode::kEmptyTest,
         "every association belongs to a single-association drug; "
         "nothing left to train on");
  split.masked_matrix = r.masked(split.test_positives);
  split.train_positives = split.masked_matrix.positives();
  return split;
}

std::size_t nearest_neighbor(const SimilarityMatrix& sim, std::size_t i) {
  if (sim.dim() < 2)
    fail(ErrorCode::kNoNeighbor, "similarity matrix of dim 1 has no neighbor");
  if (i >= sim.dim())
    fail(ErrorCode::kInvalidArgument, "drug index out of range");
  std::size_t best = i == 0 ? 1 : 0;
  for (std::size_t k = best + 1; k < sim.dim(); ++k) {
    if (k == i) continue;
    if (sim.at(i, k) > sim.at(i, best)) best = k;
  }
  return best;
}

std::vector<std::size_t> nearest_neighbors(const SimilarityMatrix& sim) {
  std::vector<std::size_t> out(sim.dim());
  for (std::size_t i = 0; i < sim.dim(); ++i) out[i] = nearest_neighbor(sim, i);
  return out;
}

}  // namespace puon
