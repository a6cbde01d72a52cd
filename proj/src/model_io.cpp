#include <fstream>
#include <stdexcept>

#include "epiplan/neural.hpp"
#include "json.hpp"

namespace epiplan {

namespace {
constexpr int kModelVersion = 1;
}

void save_model(const RegressorModel &model, const std::string &path) {
  nlohmann::json doc;
  doc["version"] = kModelVersion;
  doc["widths"] = {{"node_emb", model.dims.node_emb},
                   {"edge_emb", model.dims.edge_emb},
                   {"hidden", model.dims.hidden},
                   {"blocks", model.dims.blocks}};
  AdamWConfig adamw;
  doc["hyperparams"] = {{"lr", adamw.lr},
                        {"beta1", adamw.beta1},
                        {"beta2", adamw.beta2},
                        {"eps", adamw.eps},
                        {"weight_decay", adamw.weight_decay}};
  doc["prep_config"] = {{"d_max", model.prep.d_max},
                        {"min_val", model.prep.min_val},
                        {"max_val", model.prep.max_val},
                        {"p_m", model.prep.p_m}};
  nlohmann::json params = nlohmann::json::array();
  for (const Param *p : model.parameters())
    params.push_back(
        {{"name", p->name}, {"shape", p->shape}, {"values", p->value}});
  doc["params"] = std::move(params);
  nlohmann::json buffers = nlohmann::json::array();
  for (auto &[name, values] : model.buffers())
    buffers.push_back({{"name", name}, {"values", *values}});
  doc["bn_running_stats"] = std::move(buffers);

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("save_model: cannot open " + path);
  out << doc.dump();
  if (!out)
    throw std::runtime_error("save_model: write failed for " + path);
}

RegressorModel load_model(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("load_model: cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("load_model: corrupt file: " +
                             std::string(e.what()));
  }
  try {
    if (doc.at("version").get<int>() != kModelVersion)
      throw std::runtime_error("load_model: unsupported version");
    ModelDims dims;
    dims.node_emb = doc.at("widths").at("node_emb").get<std::uint32_t>();
    dims.edge_emb = doc.at("widths").at("edge_emb").get<std::uint32_t>();
    dims.hidden = doc.at("widths").at("hidden").get<std::uint32_t>();
    dims.blocks = doc.at("widths").at("blocks").get<std::uint32_t>();
    PrepConfig prep;
    prep.d_max = doc.at("prep_config").at("d_max").get<std::uint32_t>();
    prep.min_val = doc.at("prep_config").at("min_val").get<double>();
    prep.max_val = doc.at("prep_config").at("max_val").get<double>();
    prep.p_m = doc.at("prep_config").at("p_m").get<double>();

    RegressorModel model = make_model(0, dims, prep);
    std::vector<Param *> params = model.parameters();
    const nlohmann::json &stored = doc.at("params");
    if (stored.size() != params.size())
      throw std::runtime_error("load_model: parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const nlohmann::json &entry = stored[i];
      if (entry.at("name").get<std::string>() != params[i]->name)
        throw std::runtime_error("load_model: parameter name mismatch: " +
                                 entry.at("name").get<std::string>());
      auto shape = entry.at("shape").get<std::vector<std::uint32_t>>();
      if (shape != params[i]->shape)
        throw std::runtime_error("load_model: shape mismatch for " +
                                 params[i]->name);
      auto values = entry.at("values").get<std::vector<double>>();
      if (values.size() != params[i]->value.size())
        throw std::runtime_error("load_model: value count mismatch for " +
                                 params[i]->name);
      params[i]->value = std::move(values);
    }
    auto buffers = model.buffers();
    const nlohmann::json &stored_buffers = doc.at("bn_running_stats");
    if (stored_buffers.size() != buffers.size())
      throw std::runtime_error("load_model: buffer count mismatch");
    for (std::size_t i = 0; i < buffers.size(); ++i) {
      const nlohmann::json &entry = stored_buffers[i];
      if (entry.at("name").get<std::string>() != buffers[i].first)
        throw std::runtime_error("load_model: buffer name mismatch");
      auto values = entry.at("values").get<std::vector<double>>();
      if (values.size() != buffers[i].second->size())
        throw std::runtime_error("load_model: buffer size mismatch for " +
                                 buffers[i].first);
      *buffers[i].second = std::move(values);
    }
    return model;
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("load_model: corrupt file: " +
                             std::string(e.what()));
  }
}

} // namespace epiplan
