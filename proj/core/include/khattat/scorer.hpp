#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "khattat/features.hpp"
#include "khattat/raster.hpp"

namespace khattat {

enum class RequestKind { sds_grad, features, clip_score, font_embed, concepts, font_attrs };

std::string_view to_string(RequestKind kind);
/// Throws ScorerError(malformed) for unknown names.
RequestKind parse_request_kind(std::string_view name);

/// H x W x C float32 image, row-major with interleaved channels.
struct WireImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    bool operator==(const WireImage&) const = default;
};

/// Guidance images are white paper with black ink: value = 1 - coverage.
WireImage to_wire_image(const RasterImage& coverage, int channels = 3);
/// Inverse of to_wire_image (channel mean).
RasterImage coverage_from_wire(const WireImage& image);
/// Chain a gradient w.r.t. the guidance image back to coverage.
RasterImage coverage_gradient_from_wire(const WireImage& gradient);

struct ScorerRequest {
    RequestKind kind = RequestKind::sds_grad;
    std::string id;
    std::optional<std::string> prompt;
    std::optional<WireImage> image;
    std::int64_t seed = 0;
    /// Reference features for a `features` request; asks the service to
    /// also return the gradient of the mean squared feature distance.
    std::optional<std::vector<double>> reference;

    bool operator==(const ScorerRequest&) const = default;
};

struct ScorerResponse {
    std::string id;
    std::optional<WireImage> gradient;
    std::optional<std::vector<double>> features;
    std::optional<double> score;
    std::optional<std::vector<std::string>> strings;
    std::optional<std::string> error;

    bool operator==(const ScorerResponse&) const = default;
};

/// Field-presence rules per request kind. Throws ScorerError(usage).
void validate_request(const ScorerRequest& request);
/// Checks the response answers `request`: matching id, the expected
/// field, finite floats, gradient shaped like the image. An error payload
/// becomes ScorerError(server) with the message verbatim; anything else
/// wrong is ScorerError(malformed).
void validate_response(const ScorerRequest& request, const ScorerResponse& response);

std::string encode_request(const ScorerRequest& request);
ScorerRequest decode_request(std::string_view json);
std::string encode_response(const ScorerResponse& response);
ScorerResponse decode_response(std::string_view json);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ScorerError(malformed) on invalid input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// A guidance service. Implementations are safe to share across threads.
class Scorer {
public:
    virtual ~Scorer() = default;
    /// Raw exchange; may return an error payload.
    virtual ScorerResponse exchange(const ScorerRequest& request) const = 0;
    virtual std::string name() const = 0;

    /// exchange() plus validate_response(); assigns an id when empty.
    ScorerResponse call(ScorerRequest request) const;
};

/// Typed helpers over Scorer::call.
struct SdsResult {
    RasterImage gradient;  // w.r.t. coverage
    double proxy = 0.0;    // HW * |g|^2 / 4: the loss itself when g is an MSE-style pull
};
SdsResult request_sds(const Scorer& scorer, const RasterImage& coverage, const std::string& prompt, std::int64_t seed);
double request_clip_score(const Scorer& scorer, const RasterImage& coverage, const std::string& prompt);
std::vector<double> request_image_embedding(const Scorer& scorer, const RasterImage& coverage);
std::vector<double> request_text_embedding(const Scorer& scorer, const std::string& prompt);
std::vector<std::string> request_strings(const Scorer& scorer, RequestKind kind, const std::string& prompt);

struct HttpScorerOptions {
    double timeout_seconds = 120.0;
    int retries = 2;
    double backoff_seconds = 0.5;  // doubled after each failed attempt
    /// Replaced in tests to observe backoff without waiting.
    std::function<void(double)> sleep;
};

/// POSTs JSON to {url}/v1/score. Transport failures and timeouts are
/// retried with exponential backoff; protocol errors never are.
class HttpScorer final : public Scorer {
public:
    explicit HttpScorer(std::string url, HttpScorerOptions options = {});
    ScorerResponse exchange(const ScorerRequest& request) const override;
    std::string name() const override { return url_; }

private:
    std::string url_;
    std::string host_;
    std::string path_;
    HttpScorerOptions options_;
};

/// In-process stand-in with no models: features come from the filter bank,
/// the semantic gradient is zero, the clip score is 0 and embeddings are
/// deterministic image statistics (or a hashed bag of words for text).
class BuiltinScorer : public Scorer {
public:
    static constexpr std::size_t kEmbeddingDim = 32;

    ScorerResponse exchange(const ScorerRequest& request) const override;
    std::string name() const override { return "builtin"; }

protected:
    FilterBankExtractor extractor_;
};

/// Test double for semantic guidance: an MSE pull toward a fixed target.
/// sds-grad returns 2 (image - target) / HW per channel and clip-score
/// returns 1 - MSE.
class MockSdsScorer final : public BuiltinScorer {
public:
    explicit MockSdsScorer(RasterImage target_coverage);
    ScorerResponse exchange(const ScorerRequest& request) const override;
    std::string name() const override { return "mock"; }
    const RasterImage& target() const { return target_; }

private:
    RasterImage target_;
};

/// Readability features computed by a remote OCR encoder.
class RemoteFeatureExtractor final : public FeatureExtractor {
public:
    explicit RemoteFeatureExtractor(const Scorer& scorer) : scorer_(scorer) {}
    ExtractorKind kind() const override { return ExtractorKind::remote_ocr_encoder; }
    /// Unknown until the first request; 0 before that.
    std::size_t feature_dim(int width, int height) const override;
    std::vector<double> extract(const RasterImage& image) const override;
    FeatureLoss compare(std::span<const double> reference, const RasterImage& current) const override;

private:
    const Scorer& scorer_;
    mutable std::atomic<std::size_t> dim_{0};
};

/// Resolve a scorer spec: "builtin", "mock:<target.png>" or an http URL.
std::unique_ptr<Scorer> make_scorer(const std::string& spec, HttpScorerOptions options = {});

}  // namespace khattat
