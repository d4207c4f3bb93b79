#include "mlas/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mlas {

using nlohmann::json;

namespace {

json tensor_entry(const double* data, std::size_t rows, std::size_t cols) {
    json t;
    t["rows"] = rows;
    t["cols"] = cols;
    t["data"] = std::vector<double>(data, data + rows * cols);
    return t;
}

Mat mat_from_entry(const json& t) {
    Mat m(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
    auto data = t.at("data").get<std::vector<double>>();
    if (data.size() != m.rows * m.cols) {
        throw SchemaError("tensor data length does not match its shape");
    }
    m.data = std::move(data);
    return m;
}

Vec vec_from_entry(const json& t) {
    Mat m = mat_from_entry(t);
    if (m.cols != 1) throw SchemaError("expected a column vector tensor");
    return m.data;
}

std::string activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw SchemaError("unknown activation '" + s + "'");
}

} // namespace

json params_to_json(const FusionParams& params) {
    json j;
    j["format"] = "mlas-checkpoint";
    j["version"] = 1;
    j["variant"] = to_string(params.variant);
    j["activation"] = activation_name(params.attnet.activation);
    json tensors;
    for (std::size_t m = 0; m < params.attnet.layers.size(); ++m) {
        const auto& layer = params.attnet.layers[m];
        std::string base = "attnet.layer" + std::to_string(m + 1);
        tensors[base + ".W"] = tensor_entry(layer.W.data.data(), layer.W.rows, layer.W.cols);
        tensors[base + ".b"] = tensor_entry(layer.b.data(), layer.b.size(), 1);
    }
    const auto& s = params.seqnet;
    auto put_mat = [&](const char* name, const Mat& m) {
        tensors[name] = tensor_entry(m.data.data(), m.rows, m.cols);
    };
    auto put_vec = [&](const char* name, const Vec& v) {
        tensors[name] = tensor_entry(v.data(), v.size(), 1);
    };
    put_mat("seqnet.W_i", s.W_i); put_mat("seqnet.W_f", s.W_f);
    put_mat("seqnet.W_o", s.W_o); put_mat("seqnet.W_c", s.W_c);
    put_mat("seqnet.U_i", s.U_i); put_mat("seqnet.U_f", s.U_f);
    put_mat("seqnet.U_o", s.U_o); put_mat("seqnet.U_c", s.U_c);
    put_vec("seqnet.b_i", s.b_i); put_vec("seqnet.b_f", s.b_f);
    put_vec("seqnet.b_o", s.b_o); put_vec("seqnet.b_c", s.b_c);
    if (params.fusion_layer) {
        put_mat("fusion.W_z", params.fusion_layer->W);
        put_vec("fusion.b_z", params.fusion_layer->b);
    }
    j["tensors"] = std::move(tensors);
    return j;
}

FusionParams params_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "mlas-checkpoint") {
            throw SchemaError("not a checkpoint file");
        }
        FusionParams params;
        params.variant = fusion_variant_from_string(j.at("variant").get<std::string>());
        params.attnet.activation = activation_from_name(j.at("activation").get<std::string>());
        const json& tensors = j.at("tensors");

        std::size_t n_layers = 0;
        while (tensors.contains("attnet.layer" + std::to_string(n_layers + 1) + ".W")) {
            ++n_layers;
        }
        if (n_layers == 0) throw SchemaError("checkpoint has no attnet layers");
        for (std::size_t m = 1; m <= n_layers; ++m) {
            std::string base = "attnet.layer" + std::to_string(m);
            AttNetLayer layer;
            layer.W = mat_from_entry(tensors.at(base + ".W"));
            layer.b = vec_from_entry(tensors.at(base + ".b"));
            params.attnet.layers.push_back(std::move(layer));
        }
        auto& s = params.seqnet;
        s.W_i = mat_from_entry(tensors.at("seqnet.W_i"));
        s.W_f = mat_from_entry(tensors.at("seqnet.W_f"));
        s.W_o = mat_from_entry(tensors.at("seqnet.W_o"));
        s.W_c = mat_from_entry(tensors.at("seqnet.W_c"));
        s.U_i = mat_from_entry(tensors.at("seqnet.U_i"));
        s.U_f = mat_from_entry(tensors.at("seqnet.U_f"));
        s.U_o = mat_from_entry(tensors.at("seqnet.U_o"));
        s.U_c = mat_from_entry(tensors.at("seqnet.U_c"));
        s.b_i = vec_from_entry(tensors.at("seqnet.b_i"));
        s.b_f = vec_from_entry(tensors.at("seqnet.b_f"));
        s.b_o = vec_from_entry(tensors.at("seqnet.b_o"));
        s.b_c = vec_from_entry(tensors.at("seqnet.b_c"));
        if (tensors.contains("fusion.W_z")) {
            params.fusion_layer = FusionLayer{mat_from_entry(tensors.at("fusion.W_z")),
                                              vec_from_entry(tensors.at("fusion.b_z"))};
        }
        params.validate();
        return params;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const FusionParams& params,
                     const json& config_echo) {
    json j = params_to_json(params);
    j["config"] = config_echo;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

FusionParams load_checkpoint(const std::filesystem::path& path, json* config_echo) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("checkpoint '" + path.string() + "': " + e.what());
    }
    if (config_echo && j.contains("config")) *config_echo = j["config"];
    return params_from_json(j);
}

void write_embeddings(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, Embedding>>& embeddings,
                      const json& config_echo) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write embeddings '" + path.string() + "'");
    json header;
    header["mlas_header"] = json{{"kind", "embeddings"}, {"config", config_echo}};
    out << header.dump() << "\n";
    for (const auto& [id, emb] : embeddings) {
        json line;
        line["id"] = id;
        line["embedding"] = emb;
        out << line.dump() << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::pair<std::string, Embedding>> load_embeddings(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embeddings '" + path.string() + "'");
    std::vector<std::pair<std::string, Embedding>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("embeddings line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("mlas_header")) continue;
        try {
            out.emplace_back(j.at("id").get<std::string>(), j.at("embedding").get<Vec>());
        } catch (const json::exception& e) {
            throw ParseError("embeddings line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.empty()) throw SchemaError("embeddings file '" + path.string() + "' is empty");
    return out;
}

void write_train_report(const std::filesystem::path& path, const TrainReport& report,
                        const json& config_echo) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write train report '" + path.string() + "'");
    out << "# config: " << config_echo.dump() << "\n";
    out << "# stop_reason: " << to_string(report.stop_reason) << "\n";
    out << "epoch,train_loss,val_loss\n";
    out.precision(17);
    for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
        out << (e + 1) << "," << report.train_loss[e] << ",";
        if (std::isnan(report.val_loss[e])) {
            out << "nan";
        } else {
            out << report.val_loss[e];
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& report) {
    json j;
    j["nmi"] = report.nmi_value;
    if (report.nmi_before) {
        j["nmi_before"] = *report.nmi_before;
        j["nmi_gain"] = report.nmi_value - *report.nmi_before;
    }
    j["k"] = report.k;
    j["clusterer"] = report.clusterer;
    if (report.distances.mean_similar) {
        j["mean_similar_distance"] = *report.distances.mean_similar;
    }
    if (report.distances.mean_dissimilar) {
        j["mean_dissimilar_distance"] = *report.distances.mean_dissimilar;
    }
    j["config"] = report.config_echo;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write eval report '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Partition load_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open truth file '" + path.string() + "'");
    std::vector<std::pair<std::string, std::string>> rows;
    std::set<std::string> group_names;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError("truth line " + std::to_string(line_no) + ": expected 'id,group'");
        }
        rows.emplace_back(line.substr(0, comma), line.substr(comma + 1));
        group_names.insert(rows.back().second);
    }
    if (rows.empty()) throw SchemaError("truth file '" + path.string() + "' holds no rows");
    std::map<std::string, std::size_t> group_index;
    for (const auto& g : group_names) group_index.emplace(g, group_index.size());
    Partition truth;
    truth.k = group_index.size();
    for (const auto& [id, group] : rows) {
        if (!truth.assignment.emplace(id, group_index.at(group)).second) {
            throw SchemaError("truth file assigns id '" + id + "' twice");
        }
    }
    return truth;
}

void write_truth(const std::filesystem::path& path, const Partition& truth,
                 const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write truth file '" + path.string() + "'");
    if (!comment.empty()) out << "# " << comment << "\n";
    std::vector<std::pair<std::string, std::size_t>> rows(truth.assignment.begin(),
                                                          truth.assignment.end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [id, group] : rows) out << id << "," << group << "\n";
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

} // namespace mlas
