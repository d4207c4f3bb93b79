#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mlas/linalg.hpp"

namespace mlas {

/// Ordered set of distinct categorical item identifiers. Item index is
/// stable for the lifetime of the dataset.
class Vocabulary {
  public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> items);

    std::size_t size() const { return items_.size(); }
    const std::vector<std::string>& items() const { return items_; }
    const std::string& item(std::size_t idx) const { return items_[idx]; }
    std::optional<std::size_t> index_of(const std::string& item) const;

  private:
    std::vector<std::string> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct RawSequence {
    std::vector<std::string> steps;
};

/// Zero-padded one-hot encoding of a sequence. Rows 1..true_length are
/// one-hot; the remaining rows are all zeros and must never influence a
/// forward pass.
struct EncodedSequence {
    Mat matrix;              // padded_length x vocab_size
    std::size_t true_length = 0;

    std::size_t padded_length() const { return matrix.rows; }
    std::size_t vocab_size() const { return matrix.cols; }

    /// Vocabulary index of the item at step t (0-based, t < true_length).
    std::size_t item_index(std::size_t t) const;
};

struct AttributeVector {
    Vec values;
};

struct AttributedSequence {
    std::string id;
    AttributeVector attributes;
    EncodedSequence sequence;
};

/// Labeled pair of instances: 0 = similar, 1 = dissimilar.
struct FeedbackTriplet {
    std::string left;
    std::string right;
    int label = 0;
};

/// A loaded dataset with consistent (attr_dim, padded_length, vocab).
class Dataset {
  public:
    Dataset() = default;
    Dataset(Vocabulary vocab, std::vector<AttributedSequence> instances,
            std::size_t attr_dim, std::size_t padded_length);

    const Vocabulary& vocab() const { return vocab_; }
    const std::vector<AttributedSequence>& instances() const { return instances_; }
    std::size_t size() const { return instances_.size(); }
    std::size_t attr_dim() const { return attr_dim_; }
    std::size_t padded_length() const { return padded_length_; }
    std::size_t vocab_size() const { return vocab_.size(); }

    /// nullptr when the id is unknown.
    const AttributedSequence* find(const std::string& id) const;
    /// Throws ReferenceError when the id is unknown.
    const AttributedSequence& at(const std::string& id) const;

  private:
    Vocabulary vocab_;
    std::vector<AttributedSequence> instances_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::size_t attr_dim_ = 0;
    std::size_t padded_length_ = 0;
};

/// Raw record as stored on disk, before encoding.
struct DatasetRecord {
    std::string id;
    Vec attributes;
    std::vector<std::string> steps;
};

// -- encoding -------------------------------------------------------------

/// One-hot encode and zero-pad to pad_to rows. Throws EncodingError on an
/// unknown item and ValueError when pad_to is shorter than the sequence.
EncodedSequence one_hot_encode(const RawSequence& seq, const Vocabulary& vocab,
                               std::size_t pad_to);

/// Inverse of one_hot_encode over rows 1..true_length.
RawSequence decode(const EncodedSequence& seq, const Vocabulary& vocab);

/// Derive the vocabulary (sorted set of items) and padded length
/// (max sequence length) from records and encode everything.
Dataset build_dataset(const std::vector<DatasetRecord>& records);

// -- file formats ---------------------------------------------------------

/// Dataset files are JSON lines; each record carries `id`, `attributes`
/// and `sequence`. A first-line header object `{"mlas_header": ...}` is
/// skipped on load.
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<DatasetRecord>& records,
                   const std::string& header_json = "");

/// Feedback files are `left_id,right_id,label` lines; `#` starts a comment.
std::vector<FeedbackTriplet> load_feedback(const std::filesystem::path& path,
                                           const Dataset& dataset);
/// Same parse without resolving ids against a dataset (labels and
/// self-pairs are still checked).
std::vector<FeedbackTriplet> load_feedback_lines(const std::filesystem::path& path);
void write_feedback(const std::filesystem::path& path,
                    const std::vector<FeedbackTriplet>& triplets,
                    const std::string& comment = "");

/// Deterministic split; validation gets round(fraction * total) triplets.
std::pair<std::vector<FeedbackTriplet>, std::vector<FeedbackTriplet>>
split_feedback(const std::vector<FeedbackTriplet>& triplets,
               double validation_fraction, std::uint64_t seed);

} // namespace mlas
