#include "vsl/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include "vsl/bytes.hpp"
#include "vsl/error.hpp"

namespace vsl {
namespace {

nlohmann::json shapes(const Params& p) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : p) out.push_back({l.in_dim(), l.out_dim()});
  return out;
}

void write_params(ByteWriter& w, const Params& p) {
  for (const auto& l : p) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) w.f64(l.bias(i));
  }
}

Params read_params(ByteReader& r, const nlohmann::json& shape_list) {
  Params p;
  for (const auto& s : shape_list) {
    const auto in = s.at(0).get<Eigen::Index>();
    const auto out = s.at(1).get<Eigen::Index>();
    DenseLayer l;
    l.weight.resize(in, out);
    l.bias.resize(out);
    for (Eigen::Index i = 0; i < in; ++i) {
      for (Eigen::Index c = 0; c < out; ++c) l.weight(i, c) = r.f64();
    }
    for (Eigen::Index i = 0; i < out; ++i) l.bias(i) = r.f64();
    p.push_back(std::move(l));
  }
  return p;
}

}  // namespace

void save_checkpoint(const std::string& dir, const std::string& stem, const SplitModel& model,
                     const nlohmann::json& metadata) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ByteWriter w;
  write_params(w, model.client);
  write_params(w, model.server);
  const std::string bin_name = stem + ".bin";
  write_file((fs::path(dir) / bin_name).string(), w.data());

  nlohmann::json manifest = {
      {"format", "vsl-checkpoint-v1"},
      {"data_file", bin_name},
      {"dtype", "f64-le"},
      {"cut_width", model.cut_width},
      {"lr", model.lr},
      {"client_layers", shapes(model.client)},
      {"server_layers", shapes(model.server)},
      {"num_values", parameter_count(model.client) + parameter_count(model.server)},
      {"metadata", metadata},
  };
  std::ofstream out(fs::path(dir) / (stem + ".json"));
  if (!out) throw Error("cannot write checkpoint manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

SplitModel load_checkpoint(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw Error("cannot open " + manifest_path);
  const nlohmann::json manifest = nlohmann::json::parse(in);
  if (manifest.value("format", "") != "vsl-checkpoint-v1") throw DecodeError("unknown checkpoint format");
  const Bytes data = read_file(
      (fs::path(manifest_path).parent_path() / manifest.at("data_file").get<std::string>()).string());
  ByteReader r(data);
  SplitModel m;
  m.client = read_params(r, manifest.at("client_layers"));
  m.server = read_params(r, manifest.at("server_layers"));
  r.expect_done("checkpoint data");
  m.cut_width = manifest.at("cut_width").get<std::size_t>();
  m.lr = manifest.at("lr").get<double>();
  validate_split_model(m);
  return m;
}

}  // namespace vsl
