#include "tnqe/chem_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace tnqe {

FermionIntegrals FermionIntegrals::zeros(int n, int n_electrons, int ms2) {
  FermionIntegrals f;
  f.n_spatial = n;
  f.n_electrons = n_electrons;
  f.ms2 = ms2;
  f.h1 = Matrix::Zero(n, n);
  f.h2.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
  return f;
}

void FermionIntegrals::set_eri(int p, int q, int r, int s, double v) {
  const std::size_t n = n_spatial;
  auto at = [&](int a, int b, int c, int d) -> double& {
    return h2[((a * n + b) * n + c) * n + d];
  };
  at(p, q, r, s) = v;
  at(q, p, r, s) = v;
  at(p, q, s, r) = v;
  at(q, p, s, r) = v;
  at(r, s, p, q) = v;
  at(s, r, p, q) = v;
  at(r, s, q, p) = v;
  at(s, r, q, p) = v;
}

void FermionIntegrals::validate(double tol) const {
  const int n = n_spatial;
  if (n < 0 || h1.rows() != n || h1.cols() != n ||
      h2.size() != static_cast<std::size_t>(n) * n * n * n)
    throw PreconditionError("integral array shapes do not match n_spatial");
  if (n_electrons < 0 || n_electrons > 2 * n) throw PreconditionError("too many electrons");
  if (std::abs(ms2) > n_electrons) throw PreconditionError("|ms2| exceeds electron count");
  if ((h1 - h1.transpose()).cwiseAbs().maxCoeff() > tol && n > 0)
    throw PreconditionError("h1 not symmetric");
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const double v = eri(p, q, r, s);
          if (std::abs(v - eri(q, p, r, s)) > tol || std::abs(v - eri(p, q, s, r)) > tol ||
              std::abs(v - eri(r, s, p, q)) > tol)
            throw PreconditionError("h2 lacks 8-fold symmetry");
        }
}

namespace {

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Pull "KEY=values" pairs out of the namelist header. Values run until the
// next KEY= token.
std::map<std::string, std::vector<std::string>> parse_header(const std::string& header) {
  std::string h = header;
  for (auto& c : h)
    if (c == ',' || c == '\n' || c == '\r' || c == '\t') c = ' ';
  // Split "A=1" into "A=", "1".
  std::string spaced;
  for (char c : h) {
    spaced.push_back(c);
    if (c == '=') spaced.push_back(' ');
  }
  std::istringstream ss(spaced);
  std::map<std::string, std::vector<std::string>> out;
  std::string tok, key;
  while (ss >> tok) {
    const std::string u = upper(tok);
    if (u == "&FCI" || u == "&END" || u == "/" || u == "$FCI" || u == "$END") continue;
    if (u.size() > 1 && u.back() == '=') {
      key = u.substr(0, u.size() - 1);
      out[key];
    } else if (u.find('=') != std::string::npos) {
      continue;
    } else if (!key.empty()) {
      out[key].push_back(tok);
    }
  }
  return out;
}

double parse_value(std::string tok, int line) {
  for (auto& c : tok)
    if (c == 'D' || c == 'd') c = 'E';
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line) + ": bad numeric value '" + tok + "'");
  }
}

bool header_ends(const std::string& line) {
  const std::string u = upper(line);
  return u.find("&END") != std::string::npos || u.find("$END") != std::string::npos ||
         (u.find_first_not_of(" \t\r") != std::string::npos &&
          u.substr(u.find_first_not_of(" \t\r"), 1) == "/");
}

}  // namespace

FermionIntegrals parse_fcidump(std::istream& in) {
  std::string line, header;
  int lineno = 0;
  bool done = false;
  while (std::getline(in, line)) {
    ++lineno;
    header += line + "\n";
    if (header_ends(line)) {
      done = true;
      break;
    }
  }
  if (!done) throw FormatError("line " + std::to_string(lineno) + ": header terminator not found");

  auto kv = parse_header(header);
  auto get_int = [&](const std::string& key, bool required, int fallback) {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) {
      if (required)
        throw FormatError("line " + std::to_string(lineno) + ": header key " + key + " missing");
      return fallback;
    }
    try {
      return std::stoi(it->second.front());
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(lineno) + ": header key " + key + " not an integer");
    }
  };
  const int norb = get_int("NORB", true, 0);
  const int nelec = get_int("NELEC", true, 0);
  const int ms2 = get_int("MS2", false, 0);
  if (norb <= 0) throw FormatError("line " + std::to_string(lineno) + ": NORB must be positive");
  if (nelec < 0 || nelec > 2 * norb || std::abs(ms2) > nelec || (nelec + ms2) % 2 != 0)
    throw FormatError("line " + std::to_string(lineno) + ": inconsistent NELEC/MS2");
  if (kv.count("UHF") && !kv["UHF"].empty() && upper(kv["UHF"].front()).find('T') != std::string::npos)
    throw FormatError("unrestricted FCIDUMP files are not supported");

  FermionIntegrals f = FermionIntegrals::zeros(norb, nelec, ms2);
  std::map<std::array<int, 4>, double> seen;
  auto record = [&](std::array<int, 4> key, double v, int ln) {
    auto [it, fresh] = seen.emplace(key, v);
    if (!fresh && std::abs(it->second - v) > 1e-12 * std::max(1.0, std::abs(v)))
      throw FormatError("line " + std::to_string(ln) + ": conflicting duplicate record");
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string vt;
    if (!(ls >> vt)) continue;
    int i, j, k, l;
    if (!(ls >> i >> j >> k >> l))
      throw FormatError("line " + std::to_string(lineno) + ": expected 'value i j k l'");
    const double v = parse_value(vt, lineno);
    for (int idx : {i, j, k, l})
      if (idx < 0 || idx > norb)
        throw FormatError("line " + std::to_string(lineno) + ": index out of range [1, NORB]");
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      record({0, 0, 0, 0}, v, lineno);
      f.e_core = v;
    } else if (i > 0 && j > 0 && k == 0 && l == 0) {
      const int p = std::max(i, j) - 1, q = std::min(i, j) - 1;
      record({p + 1, q + 1, 0, 0}, v, lineno);
      f.h1(p, q) = v;
      f.h1(q, p) = v;
    } else if (i > 0 && j > 0 && k > 0 && l > 0) {
      int p = i - 1, q = j - 1, r = k - 1, s = l - 1;
      if (p < q) std::swap(p, q);
      if (r < s) std::swap(r, s);
      if (std::make_pair(p, q) < std::make_pair(r, s)) {
        std::swap(p, r);
        std::swap(q, s);
      }
      record({p + 1, q + 1, r + 1, s + 1}, v, lineno);
      f.set_eri(p, q, r, s, v);
    } else if (i > 0 && j == 0 && k == 0 && l == 0) {
      // orbital energy record; not part of the Hamiltonian
    } else {
      throw FormatError("line " + std::to_string(lineno) + ": unrecognized index pattern");
    }
  }
  return f;
}

FermionIntegrals parse_fcidump(const std::string& text) {
  std::istringstream ss(text);
  return parse_fcidump(ss);
}

FermionIntegrals load_fcidump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  FermionIntegrals f = parse_fcidump(in);
  f.label = path.filename().string();
  return f;
}

namespace {
void put_record(std::string& out, double v, int i, int j, int k, int l) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%24.17e %4d %4d %4d %4d\n", v, i, j, k, l);
  out += buf;
}
}  // namespace

std::string write_fcidump(const FermionIntegrals& f) {
  const int n = f.n_spatial;
  std::string out = " &FCI NORB=" + std::to_string(n) + ",NELEC=" + std::to_string(f.n_electrons) +
                    ",MS2=" + std::to_string(f.ms2) + ",\n  ORBSYM=";
  for (int p = 0; p < n; ++p) out += "1,";
  out += "\n  ISYM=1,\n &END\n";
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s) {
          if (p * (p + 1) / 2 + q < r * (r + 1) / 2 + s) continue;
          const double v = f.eri(p, q, r, s);
          if (v != 0.0) put_record(out, v, p + 1, q + 1, r + 1, s + 1);
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      if (f.h1(p, q) != 0.0) put_record(out, f.h1(p, q), p + 1, q + 1, 0, 0);
  put_record(out, f.e_core, 0, 0, 0, 0);
  return out;
}

void save_fcidump(const FermionIntegrals& ints, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << write_fcidump(ints);
}

void check_orthogonal(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) throw PreconditionError("rotation matrix not square");
  const double err =
      (u.transpose() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (u.rows() > 0 && err > tol)
    throw PreconditionError("matrix not orthogonal (deviation " + std::to_string(err) + ")");
}

FermionIntegrals rotate_integrals(const FermionIntegrals& ints, const Matrix& u) {
  const int n = ints.n_spatial;
  if (u.rows() != n) throw PreconditionError("rotation dimension mismatch");
  check_orthogonal(u);
  FermionIntegrals out = ints;
  out.h1 = u.transpose() * ints.h1 * u;
  out.h1 = 0.5 * (out.h1 + out.h1.transpose()).eval();

  const std::size_t N = n;
  std::vector<double> a = ints.h2, b(a.size(), 0.0);
  // Contract one index at a time, cycling the transformed index to the back
  // so the same loop handles all four positions.
  for (int pass = 0; pass < 4; ++pass) {
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = 0; q < N; ++q)
        for (std::size_t r = 0; r < N; ++r)
          for (std::size_t s = 0; s < N; ++s) {
            const double v = a[((p * N + q) * N + r) * N + s];
            if (v == 0.0) continue;
            // new[q][r][s][x] += u[p][x] * old[p][q][r][s]
            double* dst = &b[((q * N + r) * N + s) * N];
            for (std::size_t x = 0; x < N; ++x) dst[x] += u(p, x) * v;
          }
    std::swap(a, b);
  }
  out.h2 = std::move(a);
  // Symmetrize away rounding so downstream invariant checks are tight.
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s) {
          if (p * (p + 1) / 2 + q < r * (r + 1) / 2 + s) continue;
          const double avg = (out.eri(p, q, r, s) + out.eri(q, p, r, s) + out.eri(p, q, s, r) +
                              out.eri(q, p, s, r) + out.eri(r, s, p, q) + out.eri(s, r, p, q) +
                              out.eri(r, s, q, p) + out.eri(s, r, q, p)) /
                             8.0;
          out.set_eri(p, q, r, s, avg);
        }
  return out;
}

double coeff_l1_norm(const FermionIntegrals& ints) {
  double one = ints.h1.cwiseAbs().sum();
  double two = 0.0;
  for (double v : ints.h2) two += std::abs(v);
  // one-body: two spins; two-body: 1/2 (ps|qr) times four spin pairings.
  return 2.0 * one + 2.0 * two;
}

double spatial_l1_norm(const FermionIntegrals& ints) {
  double s = ints.h1.cwiseAbs().sum();
  for (double v : ints.h2) s += std::abs(v);
  return s;
}

}  // namespace tnqe
