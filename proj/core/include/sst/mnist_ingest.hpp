#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sst/kernel_space.hpp"

namespace sst {

// Big-endian binary tensor container used by the MNIST distribution files.
struct IdxTensor {
    std::uint8_t dtype = 0x08;       // unsigned byte; the only MNIST dtype
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload;

    std::size_t element_count() const;
};

// Header [0x00, 0x00, dtype, ndims], then ndims big-endian u32 sizes, then
// the row-major payload. Throws ParseError with the failing byte offset;
// never crashes on arbitrary input.
IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor);

// Reads a file, transparently inflating gzip (1f 8b magic).
std::vector<std::uint8_t> read_idx_file(const std::string& path);

struct LabeledImages {
    Dataset images;               // N x (H*W), pixels scaled per `raw_pixels`
    std::vector<int> labels;      // digits 0..9
    bool raw_pixels = false;      // true: 0..255, false: scaled to [0,1]
};

LabeledImages load_labeled(const std::string& images_path, const std::string& labels_path,
                           bool raw_pixels = false);
LabeledImages load_labeled(const IdxTensor& images, const IdxTensor& labels,
                           bool raw_pixels = false);

// Rows whose label equals d, order preserved.
Dataset filter_digit(const LabeledImages& data, int d);

struct RankedImage {
    Eigen::Index index;  // position in the test dataset
    double h;            // estimated density-ratio value
};

struct RankConfig {
    int cutoff = 10;
    double bandwidth = 6392915.0;  // matches raw 0..255 pixel distances
    Eigen::Index m = 1000;         // bootstrap F0 sample size for the basis
    std::uint64_t seed = 0;
};

// Builds a basis from a bootstrap F0 sample of the train set, estimates the
// expansion coefficients on the test set, and returns test indices sorted
// ascending by the estimated density ratio. Values above 1 mark test-favored
// images, below 1 train-favored ones.
std::vector<RankedImage> rank_by_density_ratio(const Dataset& train, const Dataset& test,
                                               const RankConfig& cfg = {});

// Ranking report rows as CSV: index,label,h. Labels optional (-1 if unknown).
void write_ranking_csv(const std::string& path, const std::vector<RankedImage>& ranking,
                       const std::vector<int>& labels);

// Contact sheet of the lowest / middle / highest ranked images, one row per
// group, as a binary PGM.
void write_contact_sheet_pgm(const std::string& path, const Dataset& test,
                             const std::vector<RankedImage>& ranking, int per_row,
                             int image_side, bool raw_pixels);

}  // namespace sst
