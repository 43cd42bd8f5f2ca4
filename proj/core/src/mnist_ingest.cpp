#include "sst/mnist_ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sst/diffusion_basis.hpp"
#include "sst/null_models.hpp"
#include "sst/smooth_test.hpp"

namespace sst {

std::size_t IdxTensor::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw ParseError("IDX header needs at least 4 bytes", bytes.size());
    if (bytes[0] != 0x00 || bytes[1] != 0x00)
        throw ParseError("bad IDX magic", bytes[0] != 0x00 ? 0 : 1);
    if (bytes[2] != 0x08)
        throw ParseError("unsupported IDX dtype 0x" + std::to_string(bytes[2]) +
                             ", expected unsigned byte (0x08)",
                         2);
    const std::uint8_t ndims = bytes[3];
    if (ndims == 0) throw ParseError("IDX tensor must have at least one dimension", 3);

    IdxTensor t;
    t.dtype = bytes[2];
    std::size_t off = 4;
    std::size_t count = 1;
    for (std::uint8_t i = 0; i < ndims; ++i) {
        if (off + 4 > bytes.size())
            throw ParseError("truncated IDX dimension table", off);
        std::uint32_t d = (std::uint32_t(bytes[off]) << 24) |
                          (std::uint32_t(bytes[off + 1]) << 16) |
                          (std::uint32_t(bytes[off + 2]) << 8) |
                          std::uint32_t(bytes[off + 3]);
        off += 4;
        t.dims.push_back(d);
        if (d != 0 && count > SIZE_MAX / d)
            throw ParseError("IDX dimension product overflows", off - 4);
        count *= d;
    }
    if (bytes.size() - off != count)
        throw ParseError("IDX payload length " + std::to_string(bytes.size() - off) +
                             " does not match dimension product " + std::to_string(count),
                         off);
    t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(off), bytes.end());
    return t;
}

std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor) {
    if (tensor.dims.empty()) throw UsageError("cannot serialize a dimensionless tensor");
    if (tensor.payload.size() != tensor.element_count())
        throw UsageError("payload length does not match dims");
    std::vector<std::uint8_t> out;
    out.reserve(4 + 4 * tensor.dims.size() + tensor.payload.size());
    out.push_back(0x00);
    out.push_back(0x00);
    out.push_back(tensor.dtype);
    out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
    for (auto d : tensor.dims) {
        out.push_back(static_cast<std::uint8_t>(d >> 24));
        out.push_back(static_cast<std::uint8_t>(d >> 16));
        out.push_back(static_cast<std::uint8_t>(d >> 8));
        out.push_back(static_cast<std::uint8_t>(d));
    }
    out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
    return out;
}

namespace {

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw IoError("zlib initialization failed");
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    zs.next_in = const_cast<std::uint8_t*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf;
        zs.avail_out = sizeof buf;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ParseError("corrupt gzip stream", zs.total_in);
        }
        out.insert(out.end(), buf, buf + (sizeof buf - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

}  // namespace

std::vector<std::uint8_t> read_idx_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes);
    return bytes;
}

LabeledImages load_labeled(const IdxTensor& images, const IdxTensor& labels,
                           bool raw_pixels) {
    if (images.dims.empty() || labels.dims.size() != 1)
        throw UsageError("expected an image tensor and a rank-1 label tensor");
    if (images.dims[0] != labels.dims[0])
        throw UsageError("image count " + std::to_string(images.dims[0]) +
                         " != label count " + std::to_string(labels.dims[0]));
    const std::size_t n = images.dims[0];
    std::size_t pix = n == 0 ? 0 : images.element_count() / n;

    LabeledImages out;
    out.raw_pixels = raw_pixels;
    out.images.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pix));
    const double scale = raw_pixels ? 1.0 : 1.0 / 255.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < pix; ++j)
            out.images(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                scale * images.payload[i * pix + j];
    out.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.labels.push_back(labels.payload[i]);
    return out;
}

LabeledImages load_labeled(const std::string& images_path, const std::string& labels_path,
                           bool raw_pixels) {
    return load_labeled(parse_idx(read_idx_file(images_path)),
                        parse_idx(read_idx_file(labels_path)), raw_pixels);
}

Dataset filter_digit(const LabeledImages& data, int d) {
    if (d < 0 || d > 9) throw UsageError("digit must be in 0..9");
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        if (data.labels[i] == d) rows.push_back(static_cast<Eigen::Index>(i));
    Dataset out(static_cast<Eigen::Index>(rows.size()), data.images.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = data.images.row(rows[i]);
    return out;
}

std::vector<RankedImage> rank_by_density_ratio(const Dataset& train, const Dataset& test,
                                               const RankConfig& cfg) {
    if (train.rows() == 0 || test.rows() == 0)
        throw UsageError("rank_by_density_ratio: empty train or test set");
    if (train.cols() != test.cols())
        throw UsageError("train and test dimensions differ");

    Rng rng = make_stream(cfg.seed, 0, 0);
    Dataset f0_sample = bootstrap_sample(train, cfg.m, rng);
    DiffusionBasis basis =
        DiffusionBasis::build(f0_sample, KernelConfig{cfg.bandwidth}, cfg.cutoff);

    CoefficientVector cv = estimate_coefficients(basis, test, cfg.cutoff);
    DensityRatio ratio{&basis, cv.theta};
    Vector h = ratio.eval_all(test);

    std::vector<RankedImage> ranking(static_cast<std::size_t>(test.rows()));
    for (Eigen::Index i = 0; i < test.rows(); ++i)
        ranking[static_cast<std::size_t>(i)] = {i, h(i)};
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedImage& a, const RankedImage& b) { return a.h < b.h; });
    return ranking;
}

void write_ranking_csv(const std::string& path, const std::vector<RankedImage>& ranking,
                       const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "index,label,h\n";
    char buf[64];
    for (const auto& r : ranking) {
        int label = r.index < static_cast<Eigen::Index>(labels.size())
                        ? labels[static_cast<std::size_t>(r.index)]
                        : -1;
        std::snprintf(buf, sizeof buf, "%.12g", r.h);
        out << r.index << ',' << label << ',' << buf << '\n';
    }
}

void write_contact_sheet_pgm(const std::string& path, const Dataset& test,
                             const std::vector<RankedImage>& ranking, int per_row,
                             int image_side, bool raw_pixels) {
    if (ranking.empty()) throw UsageError("empty ranking");
    per_row = std::min<int>(per_row, static_cast<int>(ranking.size()));
    const int side = image_side;
    if (test.cols() != static_cast<Eigen::Index>(side) * side)
        throw UsageError("image side does not match dataset width");

    // rows: lowest h, closest to 1, highest h
    std::vector<std::vector<Eigen::Index>> groups(3);
    for (int k = 0; k < per_row; ++k) {
        groups[0].push_back(ranking[static_cast<std::size_t>(k)].index);
        groups[2].push_back(ranking[ranking.size() - 1 - static_cast<std::size_t>(k)].index);
    }
    std::vector<std::size_t> order(ranking.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(ranking[a].h - 1.0) < std::abs(ranking[b].h - 1.0);
    });
    for (int k = 0; k < per_row; ++k)
        groups[1].push_back(ranking[order[static_cast<std::size_t>(k)]].index);

    const int width = per_row * side, height = 3 * side;
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height, 0);
    const double scale = raw_pixels ? 1.0 : 255.0;
    for (int g = 0; g < 3; ++g) {
        for (int k = 0; k < per_row; ++k) {
            const auto row = groups[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)];
            for (int y = 0; y < side; ++y)
                for (int x = 0; x < side; ++x) {
                    double v = test(row, y * side + x) * scale;
                    pixels[static_cast<std::size_t>(g * side + y) * width + k * side + x] =
                        static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
                }
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
}

}  // namespace sst
