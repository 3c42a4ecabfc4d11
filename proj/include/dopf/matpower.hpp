#pragma once

// MATPOWER .m case reader covering the subset used by the PGLib OPF cases:
// baseMVA scalar plus bus/gen/branch/gencost matrices with polynomial costs
// of degree <= 2. Everything is converted to per-unit on baseMVA.

#include <cctype>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dopf/network.hpp"

namespace dopf {

struct ParseError : std::runtime_error {
  int line = 0, column = 0;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error("line " + std::to_string(line_) + ", column " + std::to_string(col_) +
                           ": " + msg),
        line(line_),
        column(col_) {}
};

namespace detail {

inline constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

struct MatrixCell {
  double value;
  int line, column;
};

struct Matrix {
  std::vector<std::vector<MatrixCell>> rows;
  int line = 0;  // where the assignment starts
};

// Raw scan of the file into named scalar/matrix assignments. Comments (%) and
// the function header line are skipped; matrices end at "];".
struct RawCase {
  std::string name;
  double base_mva = -1.0;
  bool has_base = false;
  std::vector<std::pair<std::string, Matrix>> matrices;

  const Matrix* find(const std::string& field) const {
    for (const auto& [k, m] : matrices)
      if (k == field) return &m;
    return nullptr;
  }
};

class Scanner {
 public:
  explicit Scanner(std::string text) : text_(std::move(text)) {}

  RawCase scan() {
    RawCase raw;
    while (skip_blank(), !eof()) {
      if (match_word("function")) {
        // "function mpc = case14"
        skip_until_word_boundary();
        skip_blank();
        expect('=');
        skip_blank();
        raw.name = read_identifier();
        continue;
      }
      if (!match_word("mpc")) {
        fail("expected 'mpc.<field> = ...' assignment");
      }
      expect('.');
      std::string field = read_identifier();
      skip_blank();
      expect('=');
      skip_blank();
      if (peek() == '[') {
        Matrix m = read_matrix();
        raw.matrices.emplace_back(field, std::move(m));
      } else if (peek() == '\'' || peek() == '"') {
        read_string();  // e.g. mpc.version = '2';
      } else {
        double v = read_number();
        if (field == "baseMVA") {
          raw.base_mva = v;
          raw.has_base = true;
        }
      }
      skip_blank();
      if (peek() == ';') advance();
    }
    return raw;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }

  void advance() {
    if (eof()) return;
    if (text_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }

  void skip_blank() {
    while (!eof()) {
      char c = peek();
      if (c == '%') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
        advance();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  bool match_word(const std::string& w) {
    if (text_.compare(pos_, w.size(), w) != 0) return false;
    char next = pos_ + w.size() < text_.size() ? text_[pos_ + w.size()] : '\0';
    if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
    for (size_t i = 0; i < w.size(); ++i) advance();
    return true;
  }

  void skip_until_word_boundary() {
    skip_blank();
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) advance();
  }

  std::string read_identifier() {
    if (!std::isalpha(static_cast<unsigned char>(peek())) && peek() != '_')
      fail("expected identifier");
    std::string out;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      out += peek();
      advance();
    }
    return out;
  }

  void read_string() {
    char quote = peek();
    advance();
    while (!eof() && peek() != quote) advance();
    expect(quote);
  }

  double read_number() {
    int l = line_, c = col_;
    size_t start = pos_;
    if (peek() == '+' || peek() == '-') advance();
    while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' ||
                      peek() == 'e' || peek() == 'E' ||
                      ((peek() == '+' || peek() == '-') &&
                       (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      advance();
    if (pos_ == start || (pos_ == start + 1 && !std::isdigit(static_cast<unsigned char>(text_[start]))))
      throw ParseError("expected number", l, c);
    std::string tok = text_.substr(start, pos_ - start);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw ParseError("malformed number '" + tok + "'", l, c);
    return v;
  }

  Matrix read_matrix() {
    Matrix m;
    m.line = line_;
    expect('[');
    std::vector<MatrixCell> row;
    while (true) {
      // skip spaces/comments but stop at newline and ';' which end a row
      while (!eof()) {
        char c = peek();
        if (c == '%') {
          while (!eof() && peek() != '\n') advance();
        } else if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
          advance();
        } else {
          break;
        }
      }
      if (eof()) fail("unterminated matrix (missing '];')");
      char c = peek();
      if (c == '\n' || c == ';') {
        advance();
        if (!row.empty()) {
          m.rows.push_back(std::move(row));
          row.clear();
        }
        continue;
      }
      if (c == ']') {
        advance();
        if (!row.empty()) m.rows.push_back(std::move(row));
        return m;
      }
      MatrixCell cell{0.0, line_, col_};
      cell.value = read_number();
      row.push_back(cell);
    }
  }

  std::string text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

inline double cell(const Matrix& m, size_t r, size_t c) { return m.rows[r][c].value; }

inline void require_columns(const Matrix& m, const std::string& field, size_t n) {
  for (const auto& row : m.rows)
    if (row.size() < n)
      throw ParseError("matrix '" + field + "' row has " + std::to_string(row.size()) +
                           " fields, expected at least " + std::to_string(n),
                       row.empty() ? m.line : row[0].line, row.empty() ? 1 : row[0].column);
}

}  // namespace detail

inline NetworkCase parse_matpower(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  detail::Scanner scanner(buf.str());
  detail::RawCase raw = scanner.scan();

  if (!raw.has_base) throw ParseError("missing mpc.baseMVA", 1, 1);
  const detail::Matrix* bus = raw.find("bus");
  const detail::Matrix* gen = raw.find("gen");
  const detail::Matrix* branch = raw.find("branch");
  const detail::Matrix* gencost = raw.find("gencost");
  if (!bus) throw ParseError("missing mpc.bus matrix", 1, 1);
  if (!gen) throw ParseError("missing mpc.gen matrix", 1, 1);
  if (!branch) throw ParseError("missing mpc.branch matrix", 1, 1);
  if (!gencost) throw ParseError("missing mpc.gencost matrix", 1, 1);
  detail::require_columns(*bus, "bus", 13);
  detail::require_columns(*gen, "gen", 10);
  detail::require_columns(*branch, "branch", 11);
  detail::require_columns(*gencost, "gencost", 4);

  NetworkCase nc;
  nc.name = raw.name;
  nc.base_mva = raw.base_mva;
  const double base = nc.base_mva;

  for (size_t r = 0; r < bus->rows.size(); ++r) {
    Bus b;
    b.id = static_cast<int>(detail::cell(*bus, r, 0));
    int type = static_cast<int>(detail::cell(*bus, r, 1));
    if (type < 1 || type > 4)
      throw ParseError("unknown bus type " + std::to_string(type), bus->rows[r][1].line,
                       bus->rows[r][1].column);
    b.type = static_cast<BusType>(type);
    b.pd = detail::cell(*bus, r, 2) / base;
    b.qd = detail::cell(*bus, r, 3) / base;
    b.gs = detail::cell(*bus, r, 4) / base;
    b.bs = detail::cell(*bus, r, 5) / base;
    b.area = static_cast<int>(detail::cell(*bus, r, 6));
    b.vm0 = detail::cell(*bus, r, 7);
    b.va0 = detail::cell(*bus, r, 8) * detail::kDegToRad;
    b.vmax = detail::cell(*bus, r, 11);
    b.vmin = detail::cell(*bus, r, 12);
    nc.buses.push_back(b);
  }

  for (size_t r = 0; r < gen->rows.size(); ++r) {
    Generator g;
    g.index = static_cast<int>(r) + 1;
    g.bus = static_cast<int>(detail::cell(*gen, r, 0));
    g.qmax = detail::cell(*gen, r, 3) / base;
    g.qmin = detail::cell(*gen, r, 4) / base;
    g.in_service = detail::cell(*gen, r, 7) > 0.0;
    g.pmax = detail::cell(*gen, r, 8) / base;
    g.pmin = detail::cell(*gen, r, 9) / base;
    nc.generators.push_back(g);
  }

  for (size_t r = 0; r < branch->rows.size(); ++r) {
    Branch br;
    br.index = static_cast<int>(r) + 1;
    br.from = static_cast<int>(detail::cell(*branch, r, 0));
    br.to = static_cast<int>(detail::cell(*branch, r, 1));
    br.r = detail::cell(*branch, r, 2);
    br.x = detail::cell(*branch, r, 3);
    br.b_charge = detail::cell(*branch, r, 4);
    double rate = detail::cell(*branch, r, 5);
    br.rate_a = rate > 0.0 ? rate / base : kInf;  // 0 = unlimited
    double tap = detail::cell(*branch, r, 8);
    br.tap = tap == 0.0 ? 1.0 : tap;  // 0 = nominal ratio
    br.shift = detail::cell(*branch, r, 9) * detail::kDegToRad;
    br.in_service = detail::cell(*branch, r, 10) > 0.0;
    if (branch->rows[r].size() >= 13) {
      double lo = detail::cell(*branch, r, 11);
      double hi = detail::cell(*branch, r, 12);
      // MATPOWER: both zero, or magnitudes >= 360 deg, mean unconstrained
      if (!(lo == 0.0 && hi == 0.0)) {
        br.angmin = lo <= -360.0 ? -kInf : lo * detail::kDegToRad;
        br.angmax = hi >= 360.0 ? kInf : hi * detail::kDegToRad;
      }
    }
    nc.branches.push_back(br);
  }

  if (gencost->rows.size() != nc.generators.size() &&
      gencost->rows.size() != 2 * nc.generators.size())
    throw ParseError("gencost has " + std::to_string(gencost->rows.size()) + " rows for " +
                         std::to_string(nc.generators.size()) + " generators",
                     gencost->line, 1);
  for (size_t r = 0; r < nc.generators.size(); ++r) {
    const auto& row = gencost->rows[r];
    int model = static_cast<int>(row[0].value);
    if (model != 2)
      throw ParseError("unsupported cost model " + std::to_string(model) +
                           " (only polynomial costs are supported)",
                       row[0].line, row[0].column);
    int ncoef = static_cast<int>(row[3].value);
    if (row.size() < 4 + static_cast<size_t>(ncoef))
      throw ParseError("gencost row declares " + std::to_string(ncoef) + " coefficients", row[0].line,
                       row[0].column);
    Generator& g = nc.generators[r];
    // coefficients are highest degree first, in $/MW^k; rescale to per-unit
    std::vector<double> c(3, 0.0);  // c[0]=c2, c[1]=c1, c[2]=c0
    for (int k = 0; k < ncoef; ++k) {
      int degree = ncoef - 1 - k;
      double v = row[4 + k].value;
      if (degree > 2) {
        if (v != 0.0)
          throw ParseError("unsupported cost model: polynomial degree > 2", row[4 + k].line,
                           row[4 + k].column);
        continue;
      }
      c[2 - degree] = v;
    }
    g.c2 = c[0] * base * base;
    g.c1 = c[1] * base;
    g.c0 = c[2];
  }
  return nc;
}

inline NetworkCase parse_matpower(const std::string& text) {
  std::istringstream in(text);
  return parse_matpower(in);
}

}  // namespace dopf
