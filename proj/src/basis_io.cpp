#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dsviz/components.hpp"
#include "dsviz/error.hpp"

namespace dsviz {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "basis sidecar I/O assumes a little-endian host");

namespace {

constexpr const char* kFormat = "dsviz-basis";
constexpr int kVersion = 1;

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace

void save_basis(const ComponentBasis& basis, const std::filesystem::path& json_path, const json& extra) {
  const auto k = static_cast<std::size_t>(basis.count());
  const auto p = static_cast<std::size_t>(basis.dims());
  auto bin_path = json_path;
  bin_path.replace_extension(".bin");

  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw IoError("cannot write " + bin_path.string());
  write_doubles(bin, basis.mean.data(), p);
  const RowMatrix& c = basis.components;  // row-major storage
  write_doubles(bin, c.data(), k * p);
  write_doubles(bin, basis.eigenvalues.data(), k);
  if (!bin) throw IoError("write failed for " + bin_path.string());

  const Eigen::VectorXd ratio = basis.explained_variance_ratio();
  json j = {
      {"format", kFormat},
      {"version", kVersion},
      {"kind", to_string(basis.kind)},
      {"shape", {{"height", basis.shape.height}, {"width", basis.shape.width}, {"channels", basis.shape.channels}}},
      {"k", k},
      {"p", p},
      {"n_samples", basis.n_samples},
      {"total_variance", basis.total_variance},
      {"eigenvalues", std::vector<double>(basis.eigenvalues.data(), basis.eigenvalues.data() + k)},
      {"explained_variance_ratio", std::vector<double>(ratio.data(), ratio.data() + k)},
      {"binary",
       {{"file", bin_path.filename().string()},
        {"dtype", "float64"},
        {"byte_order", "little"},
        {"blocks",
         json::array({{{"name", "mean"}, {"offset", 0}, {"rows", 1}, {"cols", p}},
                      {{"name", "components"}, {"offset", p * sizeof(double)}, {"rows", k}, {"cols", p}},
                      {{"name", "eigenvalues"}, {"offset", (p + k * p) * sizeof(double)}, {"rows", 1}, {"cols", k}}})}}}};
  j.update(extra);
  std::ofstream out(json_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + json_path.string());
}

ComponentBasis load_basis(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot read " + json_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(json_path.string() + ": " + e.what());
  }
  if (j.value("format", "") != kFormat) throw ValidationError(json_path.string() + " is not a basis file");

  ComponentBasis b;
  b.kind = j.at("kind").get<std::string>() == "ica" ? BasisKind::ica : BasisKind::pca;
  b.shape = Shape{j.at("shape").at("height").get<int>(), j.at("shape").at("width").get<int>(),
                  j.at("shape").at("channels").get<int>()};
  const auto k = j.at("k").get<Eigen::Index>();
  const auto p = j.at("p").get<Eigen::Index>();
  b.n_samples = j.at("n_samples").get<std::size_t>();
  b.total_variance = j.at("total_variance").get<double>();

  const auto bin_path = json_path.parent_path() / j.at("binary").at("file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot read " + bin_path.string());
  std::vector<double> raw(static_cast<std::size_t>(p + k * p + k));
  bin.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(raw.size() * sizeof(double)))
    throw IoError(bin_path.string() + " is truncated");

  b.mean = Eigen::Map<const Eigen::VectorXd>(raw.data(), p);
  b.components = Eigen::Map<const RowMatrix>(raw.data() + p, k, p);
  b.eigenvalues = Eigen::Map<const Eigen::VectorXd>(raw.data() + p + k * p, k);
  return b;
}

}  // namespace dsviz
