#include "gi/recon.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gi/binary_io.hpp"
#include "gi/error.hpp"

namespace gi {

namespace {
constexpr std::uint32_t kReconFormatVersion = 1;

void check_buckets(const PatternStack& stack, const BucketSeries& buckets) {
    require(buckets.size() == stack.m_patterns, ErrorKind::InvalidArgument,
            fmt::format("{} bucket values for {} patterns", buckets.size(), stack.m_patterns));
}
}  // namespace

std::string to_string(ReconMethod method) {
    switch (method) {
        case ReconMethod::BcPlain: return "bc-plain";
        case ReconMethod::BcCentered: return "bc-centered";
        case ReconMethod::CsOmp: return "cs-omp";
        case ReconMethod::NnDenoised: return "nn-denoised";
    }
    return "unknown";
}

std::string to_string(BcMode mode) { return mode == BcMode::Plain ? "plain" : "centered"; }

BcMode bc_mode_from_string(const std::string& name) {
    if (name == "plain") return BcMode::Plain;
    if (name == "centered") return BcMode::Centered;
    fail(ErrorKind::InvalidArgument, "unknown correlation mode '" + name + "'");
}

std::string to_string(SparseBasis basis) { return basis == SparseBasis::Dct2d ? "dct2d" : "identity"; }

SparseBasis sparse_basis_from_string(const std::string& name) {
    if (name == "dct2d") return SparseBasis::Dct2d;
    if (name == "identity") return SparseBasis::Identity;
    fail(ErrorKind::InvalidArgument, "unknown sparsifying basis '" + name + "'");
}

Reconstruction bc_reconstruct(const PatternStack& stack, const BucketSeries& buckets, BcMode mode) {
    check_buckets(stack, buckets);
    const std::size_t n = stack.pixels();
    const std::size_t m = stack.m_patterns;
    Reconstruction out{stack.width, stack.height, std::vector<double>(n, 0.0),
                       mode == BcMode::Plain ? ReconMethod::BcPlain : ReconMethod::BcCentered};

    if (mode == BcMode::Plain) {
        // j outer keeps each pixel's sum in ascending pattern order.
        for (std::size_t j = 0; j < m; ++j) {
            const float* p = stack.data.data() + j * n;
            const double b = buckets.values[j];
            for (std::size_t r = 0; r < n; ++r) out.field[r] += static_cast<double>(p[r]) * b;
        }
        return out;
    }

    double bbar = 0.0;
    for (double b : buckets.values) bbar += b;
    bbar /= static_cast<double>(m);
    std::vector<double> pbar(n, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const float* p = stack.data.data() + j * n;
        for (std::size_t r = 0; r < n; ++r) pbar[r] += p[r];
    }
    for (auto& v : pbar) v /= static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
        const float* p = stack.data.data() + j * n;
        const double db = buckets.values[j] - bbar;
        for (std::size_t r = 0; r < n; ++r) out.field[r] += (static_cast<double>(p[r]) - pbar[r]) * db;
    }
    for (auto& v : out.field) v /= static_cast<double>(m);
    return out;
}

Decomposition residual_decompose(const PatternStack& stack, const ImagePlane& object) {
    Decomposition out;
    out.correlation = bc_reconstruct(stack, measure(stack, object), BcMode::Plain);
    out.residual = {stack.width, stack.height, out.correlation.field};
    const auto o = object.pixels();
    for (std::size_t r = 0; r < o.size(); ++r) out.residual.field[r] -= o[r];
    return out;
}

// ---------------------------------------------------------------------------
// Orthogonal matching pursuit

SparseSolution omp_solve(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& measurements,
                         std::size_t sparsity, double residual_tol) {
    const auto m = dictionary.rows();
    const auto n = dictionary.cols();
    require(measurements.size() == m, ErrorKind::InvalidArgument, "measurement length does not match dictionary");
    require(sparsity >= 1 && sparsity <= static_cast<std::size_t>(m), ErrorKind::InvalidArgument,
            fmt::format("sparsity must be in [1, M={}], got {}", m, sparsity));
    require(residual_tol >= 0.0, ErrorKind::InvalidArgument, "residual tolerance must be >= 0");

    SparseSolution out;
    out.coefficients = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd col_norms = dictionary.colwise().norm();
    std::vector<char> unavailable(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i)
        if (col_norms(i) == 0.0) unavailable[static_cast<std::size_t>(i)] = 1;

    Eigen::MatrixXd q(m, static_cast<Eigen::Index>(sparsity));
    Eigen::MatrixXd r_factor = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sparsity), static_cast<Eigen::Index>(sparsity));
    Eigen::VectorXd residual = measurements;
    out.residual_norms.push_back(residual.norm());

    Eigen::Index k = 0;
    while (static_cast<std::size_t>(k) < sparsity && out.residual_norms.back() > residual_tol) {
        const Eigen::VectorXd corr = dictionary.transpose() * residual;
        Eigen::Index best = -1;
        double best_score = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (unavailable[static_cast<std::size_t>(i)]) continue;
            const double score = std::abs(corr(i)) / col_norms(i);
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        if (best < 0) break;

        Eigen::VectorXd v = dictionary.col(best);
        Eigen::VectorXd proj = Eigen::VectorXd::Zero(k);
        for (int pass = 0; pass < 2; ++pass) {
            if (k == 0) break;
            const Eigen::VectorXd c = q.leftCols(k).transpose() * v;
            v -= q.leftCols(k) * c;
            proj += c;
        }
        const double vnorm = v.norm();
        unavailable[static_cast<std::size_t>(best)] = 1;
        if (vnorm <= 1e-10 * col_norms(best)) {
            out.warnings.push_back(
                fmt::format("atom {} is linearly dependent on the active set; dropped", best));
            continue;
        }
        q.col(k) = v / vnorm;
        r_factor.col(k).head(k) = proj;
        r_factor(k, k) = vnorm;
        residual -= q.col(k) * q.col(k).dot(residual);
        out.support.push_back(static_cast<std::size_t>(best));
        out.residual_norms.push_back(residual.norm());
        ++k;
    }

    if (k > 0) {
        const Eigen::VectorXd rhs = q.leftCols(k).transpose() * measurements;
        const Eigen::VectorXd theta =
            r_factor.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(rhs);
        for (Eigen::Index i = 0; i < k; ++i)
            out.coefficients(static_cast<Eigen::Index>(out.support[static_cast<std::size_t>(i)])) = theta(i);
    }
    return out;
}

Eigen::MatrixXd dct_matrix(std::size_t n) {
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd d(ni, ni);
    const double nd = static_cast<double>(n);
    for (Eigen::Index u = 0; u < ni; ++u) {
        const double scale = u == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
        for (Eigen::Index x = 0; x < ni; ++x)
            d(u, x) = scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(x) + 1.0) *
                                       static_cast<double>(u) / (2.0 * nd));
    }
    return d;
}

Eigen::MatrixXd sparsifying_basis(SparseBasis basis, std::size_t width, std::size_t height) {
    const auto n = static_cast<Eigen::Index>(width * height);
    if (basis == SparseBasis::Identity) return Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd dh = dct_matrix(height);
    const Eigen::MatrixXd dw = dct_matrix(width);
    const auto w = static_cast<Eigen::Index>(width);
    const auto h = static_cast<Eigen::Index>(height);
    Eigen::MatrixXd psi(n, n);
    // atom (u, v) at column u*w + v; pixel (row, col) at row*w + col
    for (Eigen::Index u = 0; u < h; ++u)
        for (Eigen::Index v = 0; v < w; ++v)
            for (Eigen::Index row = 0; row < h; ++row)
                for (Eigen::Index col = 0; col < w; ++col)
                    psi(row * w + col, u * w + v) = dh(u, row) * dw(v, col);
    return psi;
}

OmpResult omp_reconstruct(const Eigen::MatrixXd& patterns, std::size_t width, std::size_t height,
                          const BucketSeries& buckets, const OmpOptions& options) {
    const std::size_t n = width * height;
    require(static_cast<std::size_t>(patterns.cols()) == n, ErrorKind::InvalidArgument,
            "pattern matrix width does not match the image size");
    require(static_cast<std::size_t>(patterns.rows()) == buckets.size(), ErrorKind::InvalidArgument,
            fmt::format("{} bucket values for {} patterns", buckets.size(), patterns.rows()));
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(buckets.values.data(),
                                                                static_cast<Eigen::Index>(buckets.size()));
    const auto m = static_cast<std::size_t>(patterns.rows());
    const std::size_t k =
        options.sparsity ? *options.sparsity : std::min(std::max<std::size_t>(1, n / 10), m);
    const double tol = options.residual_tol.value_or(1e-6 * b.norm());

    const Eigen::MatrixXd psi = sparsifying_basis(options.basis, width, height);
    const Eigen::MatrixXd dictionary = patterns * psi;

    OmpResult out;
    out.solution = omp_solve(dictionary, b, k, tol);
    const Eigen::VectorXd image = psi * out.solution.coefficients;
    out.reconstruction = {width, height, std::vector<double>(image.data(), image.data() + image.size()),
                          ReconMethod::CsOmp};
    return out;
}

OmpResult omp_reconstruct(const PatternStack& stack, const BucketSeries& buckets, const OmpOptions& options) {
    check_buckets(stack, buckets);
    const Eigen::MatrixXd p =
        Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            stack.data.data(), static_cast<Eigen::Index>(stack.m_patterns), static_cast<Eigen::Index>(stack.pixels()))
            .cast<double>();
    return omp_reconstruct(p, stack.width, stack.height, buckets, options);
}

ImagePlane normalize_for_display(const Reconstruction& recon) {
    require(!recon.field.empty(), ErrorKind::InvalidArgument, "empty reconstruction");
    for (double v : recon.field)
        require(std::isfinite(v), ErrorKind::InvalidArgument, "reconstruction contains non-finite values");
    const auto [lo, hi] = std::minmax_element(recon.field.begin(), recon.field.end());
    const double min = *lo;
    const double range = *hi - *lo;
    std::vector<double> px(recon.field.size(), 0.5);
    if (range > 0.0)
        for (std::size_t r = 0; r < px.size(); ++r) px[r] = std::clamp((recon.field[r] - min) / range, 0.0, 1.0);
    return ImagePlane(recon.width, recon.height, std::move(px));
}

std::vector<std::uint8_t> serialize_reconstruction(const Reconstruction& recon) {
    require(recon.field.size() == recon.width * recon.height, ErrorKind::InvalidArgument,
            "reconstruction field size does not match its dimensions");
    ByteWriter w;
    w.magic("GIRC");
    w.u32(kReconFormatVersion);
    w.u8(static_cast<std::uint8_t>(recon.method));
    w.u64(0);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(recon.width));
    w.u32(static_cast<std::uint32_t>(recon.height));
    w.text("method=" + to_string(recon.method));
    for (double v : recon.field) w.f32(static_cast<float>(v));
    return w.take();
}

Reconstruction deserialize_reconstruction(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("GIRC");
    const auto version = r.u32();
    require(version == kReconFormatVersion, ErrorKind::FormatError,
            fmt::format("unsupported reconstruction format version {}", version));
    Reconstruction out;
    const auto method = r.u8();
    require(method <= static_cast<std::uint8_t>(ReconMethod::NnDenoised), ErrorKind::FormatError,
            "unknown reconstruction method");
    out.method = static_cast<ReconMethod>(method);
    r.u64();
    require(r.u32() == 1, ErrorKind::FormatError, "reconstruction files hold exactly one field");
    out.width = r.u32();
    out.height = r.u32();
    r.text();
    require(r.remaining() == out.width * out.height * sizeof(float), ErrorKind::CorruptionError,
            "reconstruction payload size does not match its header");
    out.field.resize(out.width * out.height);
    for (auto& v : out.field) v = r.f32();
    return out;
}

void save_reconstruction(const std::filesystem::path& path, const Reconstruction& recon) {
    write_file(path, serialize_reconstruction(recon));
}

Reconstruction load_reconstruction(const std::filesystem::path& path) {
    return deserialize_reconstruction(read_file(path));
}

}  // namespace gi
