#include "mlas/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mlas {

using nlohmann::json;

Vocabulary::Vocabulary(std::vector<std::string> items) : items_(std::move(items)) {
    if (items_.empty()) throw ValueError("vocabulary must hold at least one item");
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (!index_.emplace(items_[i], i).second) {
            throw ValueError("duplicate vocabulary item '" + items_[i] + "'");
        }
    }
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& item) const {
    auto it = index_.find(item);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t EncodedSequence::item_index(std::size_t t) const {
    const double* row = matrix.data.data() + t * matrix.cols;
    for (std::size_t j = 0; j < matrix.cols; ++j) {
        if (row[j] == 1.0) return j;
    }
    throw ValueError("row " + std::to_string(t) + " is not one-hot");
}

Dataset::Dataset(Vocabulary vocab, std::vector<AttributedSequence> instances,
                 std::size_t attr_dim, std::size_t padded_length)
    : vocab_(std::move(vocab)), instances_(std::move(instances)),
      attr_dim_(attr_dim), padded_length_(padded_length) {
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (!by_id_.emplace(instances_[i].id, i).second) {
            throw SchemaError("duplicate instance id '" + instances_[i].id + "'");
        }
    }
}

const AttributedSequence* Dataset::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &instances_[it->second];
}

const AttributedSequence& Dataset::at(const std::string& id) const {
    const AttributedSequence* p = find(id);
    if (!p) throw ReferenceError("unknown instance id '" + id + "'");
    return *p;
}

EncodedSequence one_hot_encode(const RawSequence& seq, const Vocabulary& vocab,
                               std::size_t pad_to) {
    if (pad_to < seq.steps.size()) {
        throw ValueError("pad length " + std::to_string(pad_to) +
                         " is shorter than sequence length " +
                         std::to_string(seq.steps.size()));
    }
    EncodedSequence out;
    out.matrix = Mat(pad_to, vocab.size());
    out.true_length = seq.steps.size();
    for (std::size_t t = 0; t < seq.steps.size(); ++t) {
        auto idx = vocab.index_of(seq.steps[t]);
        if (!idx) throw EncodingError("item '" + seq.steps[t] + "' is not in the vocabulary");
        out.matrix.at(t, *idx) = 1.0;
    }
    return out;
}

RawSequence decode(const EncodedSequence& seq, const Vocabulary& vocab) {
    RawSequence out;
    out.steps.reserve(seq.true_length);
    for (std::size_t t = 0; t < seq.true_length; ++t) {
        out.steps.push_back(vocab.item(seq.item_index(t)));
    }
    return out;
}

Dataset build_dataset(const std::vector<DatasetRecord>& records) {
    if (records.empty()) throw SchemaError("dataset holds no records");
    std::set<std::string> item_set;
    std::size_t attr_dim = records.front().attributes.size();
    std::size_t padded = 0;
    for (const auto& rec : records) {
        if (rec.attributes.size() != attr_dim) {
            throw SchemaError("record '" + rec.id + "' has " +
                              std::to_string(rec.attributes.size()) +
                              " attributes, expected " + std::to_string(attr_dim));
        }
        if (rec.steps.empty()) {
            throw SchemaError("record '" + rec.id + "' has an empty sequence");
        }
        for (const auto& v : rec.attributes) {
            if (!std::isfinite(v)) {
                throw SchemaError("record '" + rec.id + "' has a non-finite attribute");
            }
        }
        padded = std::max(padded, rec.steps.size());
        item_set.insert(rec.steps.begin(), rec.steps.end());
    }
    Vocabulary vocab(std::vector<std::string>(item_set.begin(), item_set.end()));
    std::vector<AttributedSequence> instances;
    instances.reserve(records.size());
    for (const auto& rec : records) {
        AttributedSequence inst;
        inst.id = rec.id;
        inst.attributes.values = rec.attributes;
        inst.sequence = one_hot_encode(RawSequence{rec.steps}, vocab, padded);
        instances.push_back(std::move(inst));
    }
    return Dataset(std::move(vocab), std::move(instances), attr_dim, padded);
}

namespace {

bool is_header_line(const json& j) {
    return j.is_object() && j.contains("mlas_header");
}

} // namespace

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file '" + path.string() + "'");
    std::vector<DatasetRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        if (is_header_line(j)) continue;
        DatasetRecord rec;
        try {
            rec.id = j.at("id").get<std::string>();
            rec.attributes = j.at("attributes").get<Vec>();
            rec.steps = j.at("sequence").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw SchemaError("dataset file '" + path.string() + "' holds no records");
    return build_dataset(records);
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<DatasetRecord>& records,
                   const std::string& header_json) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file '" + path.string() + "'");
    if (!header_json.empty()) {
        json header;
        header["mlas_header"] = json::parse(header_json);
        out << header.dump() << "\n";
    }
    for (const auto& rec : records) {
        json j;
        j["id"] = rec.id;
        j["attributes"] = rec.attributes;
        j["sequence"] = rec.steps;
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<FeedbackTriplet> load_feedback_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feedback file '" + path.string() + "'");
    std::vector<FeedbackTriplet> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string left, right, label_str;
        if (!std::getline(ss, left, ',') || !std::getline(ss, right, ',') ||
            !std::getline(ss, label_str)) {
            throw ParseError("feedback line " + std::to_string(line_no) +
                             ": expected 'left,right,label'");
        }
        int label;
        if (label_str == "0") {
            label = 0;
        } else if (label_str == "1") {
            label = 1;
        } else {
            throw ValueError("feedback line " + std::to_string(line_no) + ": label '" +
                             label_str + "' is not 0 or 1");
        }
        if (left == right) {
            throw ReferenceError("feedback line " + std::to_string(line_no) +
                                 ": self-pair '" + left + "'");
        }
        out.push_back(FeedbackTriplet{left, right, label});
    }
    return out;
}

std::vector<FeedbackTriplet> load_feedback(const std::filesystem::path& path,
                                           const Dataset& dataset) {
    std::vector<FeedbackTriplet> out = load_feedback_lines(path);
    for (const auto& t : out) {
        if (!dataset.find(t.left)) {
            throw ReferenceError("feedback references unknown id '" + t.left + "'");
        }
        if (!dataset.find(t.right)) {
            throw ReferenceError("feedback references unknown id '" + t.right + "'");
        }
    }
    return out;
}

void write_feedback(const std::filesystem::path& path,
                    const std::vector<FeedbackTriplet>& triplets,
                    const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feedback file '" + path.string() + "'");
    if (!comment.empty()) out << "# " << comment << "\n";
    for (const auto& t : triplets) {
        out << t.left << "," << t.right << "," << t.label << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::pair<std::vector<FeedbackTriplet>, std::vector<FeedbackTriplet>>
split_feedback(const std::vector<FeedbackTriplet>& triplets,
               double validation_fraction, std::uint64_t seed) {
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ValueError("validation fraction must be in [0, 1)");
    }
    std::vector<std::size_t> order(triplets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    shuffle(order, rng);
    auto n_val = static_cast<std::size_t>(
        std::llround(validation_fraction * static_cast<double>(triplets.size())));
    std::vector<FeedbackTriplet> validation, train;
    validation.reserve(n_val);
    train.reserve(triplets.size() - n_val);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_val ? validation : train).push_back(triplets[order[i]]);
    }
    return {std::move(train), std::move(validation)};
}

} // namespace mlas
