#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2v {

using Vector = std::vector<double>;

enum class Provenance { soc, con, rec, external };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Map from id to a dense vector of fixed dimensionality. Ids are kept in
/// lexicographic order so iteration (and therefore every consumer) is
/// independent of insertion order.
class EmbeddingTable {
public:
  explicit EmbeddingTable(std::size_t dim, Provenance provenance = Provenance::external);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  Provenance provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) noexcept { provenance_ = p; }

  /// Inserts or replaces; throws if the length differs from dim() or a
  /// component is not finite.
  void set(std::string id, Vector v);
  bool contains(std::string_view id) const;
  /// Throws Error if the id is absent.
  const Vector& at(std::string_view id) const;
  const Vector* find(std::string_view id) const;

  std::vector<std::string> ids() const;
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

private:
  std::size_t dim_;
  Provenance provenance_;
  std::map<std::string, Vector, std::less<>> entries_;
};

/// Text format: "n d" then one line per entry "id c_1 ... c_d", components
/// printed with 12 significant digits.
void write_embedding(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable read_embedding(std::istream& in, Provenance provenance = Provenance::external);
void save_embedding(const std::string& path, const EmbeddingTable& table);
EmbeddingTable load_embedding(const std::string& path, Provenance provenance = Provenance::external);

/// Shortest round-trip-stable rendering used by every text writer.
std::string format_real(double x);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// Cosine similarity; returns 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// 1 - cosine similarity.
double cosine_distance(std::span<const double> a, std::span<const double> b);

}  // namespace t2v
