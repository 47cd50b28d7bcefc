#include "gitstab/rational.hpp"

#include <cctype>

namespace gitstab {

std::optional<Rat> parse_rational(const std::string& s) {
  if (s.empty()) return std::nullopt;
  for (char c : s) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
          c == '+' || c == '/')) {
      return std::nullopt;
    }
  }
  try {
    Rat r(s);
    if (r.get_den() == 0) return std::nullopt;
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

double to_double(const Rat& r) { return r.get_d(); }

namespace {

// Row echelon elimination in place; returns rank.
int eliminate(RatMat& rows) {
  if (rows.empty()) return 0;
  const size_t cols = rows[0].size();
  size_t pivot_row = 0;
  for (size_t c = 0; c < cols && pivot_row < rows.size(); ++c) {
    size_t sel = pivot_row;
    while (sel < rows.size() && rows[sel][c] == 0) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[pivot_row], rows[sel]);
    for (size_t r = pivot_row + 1; r < rows.size(); ++r) {
      if (rows[r][c] == 0) continue;
      Rat f = rows[r][c] / rows[pivot_row][c];
      for (size_t cc = c; cc < cols; ++cc) {
        rows[r][cc] -= f * rows[pivot_row][cc];
      }
    }
    ++pivot_row;
  }
  return static_cast<int>(pivot_row);
}

}  // namespace

int rat_rank(RatMat rows) { return eliminate(rows); }

bool rat_in_span(const RatMat& rows, const RatVec& v) {
  RatMat m = rows;
  const int base = eliminate(m);
  m = rows;
  m.push_back(v);
  return eliminate(m) == base;
}

RatVec rat_solve_coords(const RatMat& basis_rows, const RatVec& v) {
  // Solve c^T B = v by eliminating the augmented system [B^T | v].
  const size_t d = basis_rows.size();
  const size_t n = v.size();
  RatMat aug(n, RatVec(d + 1));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) aug[i][j] = basis_rows[j][i];
    aug[i][d] = v[i];
  }
  // Forward elimination with partial (first nonzero) pivoting.
  size_t pr = 0;
  std::vector<size_t> pivot_col;
  for (size_t c = 0; c < d && pr < n; ++c) {
    size_t sel = pr;
    while (sel < n && aug[sel][c] == 0) ++sel;
    if (sel == n) continue;
    std::swap(aug[pr], aug[sel]);
    for (size_t r = 0; r < n; ++r) {
      if (r == pr || aug[r][c] == 0) continue;
      Rat f = aug[r][c] / aug[pr][c];
      for (size_t cc = c; cc <= d; ++cc) aug[r][cc] -= f * aug[pr][cc];
    }
    pivot_col.push_back(c);
    ++pr;
  }
  RatVec out(d, Rat(0));
  for (size_t i = 0; i < pivot_col.size(); ++i) {
    out[pivot_col[i]] = aug[i][d] / aug[i][pivot_col[i]];
  }
  return out;
}

bool rat_parallel(const RatVec& a, const RatVec& b) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (a[i] * b[j] != a[j] * b[i]) return false;
    }
  }
  return true;
}

}  // namespace gitstab
