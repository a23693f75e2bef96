#include "t2v/embedding.hpp"

#include "t2v/error.hpp"
#include "t2v/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <istream>
#include <ostream>

namespace t2v {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::soc: return "soc";
    case Provenance::con: return "con";
    case Provenance::rec: return "rec";
    case Provenance::external: return "external";
  }
  return "external";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "soc") return Provenance::soc;
  if (s == "con") return Provenance::con;
  if (s == "rec") return Provenance::rec;
  if (s == "external") return Provenance::external;
  throw Error("unknown embedding provenance '" + std::string(s) + "'");
}

EmbeddingTable::EmbeddingTable(std::size_t dim, Provenance provenance) : dim_(dim), provenance_(provenance) {
  if (dim == 0) throw Error("embedding dimensionality must be positive");
}

void EmbeddingTable::set(std::string id, Vector v) {
  if (id.empty()) throw Error("embedding id must be non-empty");
  if (v.size() != dim_)
    throw Error(fmt::format("vector for '{}' has {} components, table expects {}", id, v.size(), dim_));
  for (double x : v)
    if (!std::isfinite(x)) throw Error("non-finite component in vector for '" + id + "'");
  entries_.insert_or_assign(std::move(id), std::move(v));
}

bool EmbeddingTable::contains(std::string_view id) const { return entries_.find(id) != entries_.end(); }

const Vector& EmbeddingTable::at(std::string_view id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error("no vector for id '" + std::string(id) + "'");
  return it->second;
}

const Vector* EmbeddingTable::find(std::string_view id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> EmbeddingTable::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, _] : entries_) out.push_back(id);
  return out;
}

std::string format_real(double x) {
  if (x == 0.0) return "0";  // folds -0 so round trips are byte-stable
  return fmt::format("{}", x);  // shortest form that parses back to x
}

void write_embedding(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  std::string line;
  for (const auto& [id, v] : table) {
    line = id;
    for (double x : v) {
      line += ' ';
      line += format_real(x);
    }
    line += '\n';
    out << line;
  }
}

EmbeddingTable read_embedding(std::istream& in, Provenance provenance) {
  std::string line;
  if (!std::getline(in, line)) throw Error("embedding file is empty");
  const auto header = io::split_ws(line);
  unsigned long long n = 0, d = 0;
  if (header.size() != 2 || !io::parse_uint64(header[0], n) || !io::parse_uint64(header[1], d) || d == 0)
    throw Error("embedding header must be 'n d', got '" + line + "'");
  EmbeddingTable table(d, provenance);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split_ws(line);
    if (fields.size() != d + 1)
      throw Error(fmt::format("embedding line {} has {} fields, expected {}", line_no, fields.size(), d + 1));
    Vector v(d);
    for (std::size_t k = 0; k < d; ++k) v[k] = io::to_double(fields[k + 1], fmt::format("embedding line {}", line_no));
    std::string id(fields[0]);
    if (table.contains(id)) throw Error("duplicate embedding id '" + id + "'");
    table.set(std::move(id), std::move(v));
  }
  if (table.size() != n)
    throw Error(fmt::format("embedding header declares {} entries but file has {}", n, table.size()));
  return table;
}

void save_embedding(const std::string& path, const EmbeddingTable& table) {
  auto out = io::open_out(path);
  write_embedding(out, table);
  if (!out) throw IoError("failed writing '" + path + "'");
}

EmbeddingTable load_embedding(const std::string& path, Provenance provenance) {
  auto in = io::open_in(path);
  try {
    return read_embedding(in, provenance);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) { return 1.0 - cosine_similarity(a, b); }

}  // namespace t2v
