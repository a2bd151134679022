#include "khattat/scorer.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cctype>
#include <cstring>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "khattat/error.hpp"
#include "khattat/image_io.hpp"

namespace khattat {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) { throw ScorerError(ScorerError::Kind::malformed, "malformed scorer message: " + what); }

constexpr std::array<std::string_view, 6> kKindNames = {"sds-grad", "features", "clip-score", "font-embed", "concepts", "font-attrs"};

bool needs_image(RequestKind k) {
    return k == RequestKind::sds_grad || k == RequestKind::features || k == RequestKind::clip_score ||
           k == RequestKind::font_embed;
}
bool needs_prompt(RequestKind k) {
    return k == RequestKind::sds_grad || k == RequestKind::clip_score || k == RequestKind::concepts ||
           k == RequestKind::font_attrs;
}

json image_to_json(const WireImage& img) {
    std::vector<std::uint8_t> bytes(img.data.size() * 4);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        std::uint32_t u;
        std::memcpy(&u, &img.data[i], 4);
        for (int b = 0; b < 4; ++b) bytes[4 * i + std::size_t(b)] = std::uint8_t(u >> (8 * b));
    }
    return json{{"w", img.width}, {"h", img.height}, {"c", img.channels}, {"data_b64", base64_encode(bytes)}};
}

WireImage image_from_json(const json& j) {
    if (!j.is_object()) malformed("image is not an object");
    WireImage img;
    for (auto [key, field] : {std::pair{"w", &img.width}, std::pair{"h", &img.height}, std::pair{"c", &img.channels}}) {
        if (!j.contains(key) || !j[key].is_number_integer()) malformed(std::string("image field '") + key + "' missing");
        const auto v = j[key].get<std::int64_t>();
        if (v < 0 || v > 1 << 16) malformed(std::string("image field '") + key + "' out of range");
        *field = int(v);
    }
    if (!j.contains("data_b64") || !j["data_b64"].is_string()) malformed("image data missing");
    const auto bytes = base64_decode(j["data_b64"].get<std::string>());
    const std::size_t n = std::size_t(img.width) * std::size_t(img.height) * std::size_t(img.channels);
    if (bytes.size() != 4 * n) malformed("image payload has " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(4 * n));
    img.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= std::uint32_t(bytes[4 * i + std::size_t(b)]) << (8 * b);
        std::memcpy(&img.data[i], &u, 4);
    }
    return img;
}

std::vector<double> numbers_from_json(const json& j, const char* what) {
    if (!j.is_array()) malformed(std::string(what) + " is not an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const json& v : j) {
        if (!v.is_number()) malformed(std::string(what) + " contains a non-number");
        out.push_back(v.get<double>());
    }
    return out;
}

json parse(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        malformed(std::string("invalid JSON: ") + e.what());
    }
}

bool all_finite(const std::vector<float>& v) {
    for (float x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::atomic<std::uint64_t> g_next_id{0};

}  // namespace

std::string_view to_string(RequestKind kind) { return kKindNames[std::size_t(kind)]; }

RequestKind parse_request_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return RequestKind(i);
    }
    malformed("unknown request kind '" + std::string(name) + "'");
}

WireImage to_wire_image(const RasterImage& coverage, int channels) {
    WireImage w{coverage.width, coverage.height, channels, {}};
    w.data.reserve(coverage.size() * std::size_t(channels));
    for (double c : coverage.pixels) {
        for (int k = 0; k < channels; ++k) w.data.push_back(static_cast<float>(1.0 - c));
    }
    return w;
}

RasterImage coverage_from_wire(const WireImage& image) {
    if (image.channels < 1) throw ImageError("wire image has no channels");
    RasterImage out(image.width, image.height);
    const std::size_t c = std::size_t(image.channels);
    for (std::size_t p = 0; p < out.size(); ++p) {
        double sum = 0.0;
        for (std::size_t k = 0; k < c; ++k) sum += image.data[p * c + k];
        out.pixels[p] = 1.0 - sum / double(c);
    }
    return out;
}

RasterImage coverage_gradient_from_wire(const WireImage& gradient) {
    RasterImage out(gradient.width, gradient.height);
    const std::size_t c = std::size_t(gradient.channels);
    for (std::size_t p = 0; p < out.size(); ++p) {
        double sum = 0.0;
        for (std::size_t k = 0; k < c; ++k) sum += gradient.data[p * c + k];
        out.pixels[p] = -sum;
    }
    return out;
}

void validate_request(const ScorerRequest& r) {
    auto usage = [&](const std::string& what) {
        throw ScorerError(ScorerError::Kind::usage, std::string(to_string(r.kind)) + " request " + what);
    };
    if (r.kind == RequestKind::font_embed) {
        // Either a font image or, for the prompt side of font selection, text.
        if (r.image.has_value() == r.prompt.has_value()) usage("needs exactly one of image or prompt");
    } else {
        if (needs_image(r.kind) != r.image.has_value()) usage(needs_image(r.kind) ? "needs an image" : "must not carry an image");
        if (needs_prompt(r.kind) != r.prompt.has_value()) usage(needs_prompt(r.kind) ? "needs a prompt" : "must not carry a prompt");
    }
    if (r.reference && r.kind != RequestKind::features) usage("must not carry reference features");
    if (r.image) {
        const auto& im = *r.image;
        if (im.width < 1 || im.height < 1 || im.channels < 1) usage("has an empty image");
        if (im.data.size() != std::size_t(im.width) * std::size_t(im.height) * std::size_t(im.channels)) {
            usage("image buffer does not match its shape");
        }
        if (!all_finite(im.data)) usage("image contains non-finite values");
    }
}

void validate_response(const ScorerRequest& request, const ScorerResponse& r) {
    if (r.error) throw ScorerError(ScorerError::Kind::server, *r.error);
    if (r.id != request.id) malformed("response id '" + r.id + "' does not match request '" + request.id + "'");
    const bool want_gradient = request.kind == RequestKind::sds_grad || request.reference.has_value();
    const bool want_features = request.kind == RequestKind::features || request.kind == RequestKind::font_embed;
    const bool want_score = request.kind == RequestKind::clip_score;
    const bool want_strings = request.kind == RequestKind::concepts || request.kind == RequestKind::font_attrs;
    auto field = [&](bool have, bool want, const char* name) {
        if (have && !want) malformed(std::string("unexpected field '") + name + "' for " + std::string(to_string(request.kind)));
        if (!have && want) malformed(std::string("missing field '") + name + "' for " + std::string(to_string(request.kind)));
    };
    field(r.gradient.has_value(), want_gradient, "gradient");
    field(r.features.has_value(), want_features, "features");
    field(r.score.has_value(), want_score, "score");
    field(r.strings.has_value(), want_strings, "strings");
    if (r.gradient) {
        const auto& g = *r.gradient;
        const auto& im = *request.image;
        if (g.width != im.width || g.height != im.height || g.channels != im.channels) {
            malformed("gradient shape does not match the request image");
        }
        if (!all_finite(g.data)) malformed("gradient contains non-finite values");
    }
    if (r.features) {
        if (r.features->empty()) malformed("empty feature vector");
        for (double v : *r.features) {
            if (!std::isfinite(v)) malformed("features contain non-finite values");
        }
        if (request.reference && r.features->size() != request.reference->size()) {
            malformed("feature dimension does not match the reference");
        }
    }
    if (r.score && !(std::isfinite(*r.score) && *r.score >= -1.0 && *r.score <= 1.0)) malformed("score outside [-1, 1]");
}

std::string encode_request(const ScorerRequest& r) {
    json j{{"kind", to_string(r.kind)}, {"id", r.id}, {"seed", r.seed}};
    if (r.prompt) j["prompt"] = *r.prompt;
    if (r.image) j["image"] = image_to_json(*r.image);
    if (r.reference) j["reference"] = *r.reference;
    return j.dump();
}

ScorerRequest decode_request(std::string_view text) {
    const json j = parse(text);
    if (!j.is_object()) malformed("request is not an object");
    ScorerRequest r;
    if (!j.contains("kind") || !j["kind"].is_string()) malformed("request kind missing");
    r.kind = parse_request_kind(j["kind"].get<std::string>());
    if (j.contains("id")) {
        if (!j["id"].is_string()) malformed("request id is not a string");
        r.id = j["id"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) malformed("seed is not an integer");
        r.seed = j["seed"].get<std::int64_t>();
    }
    if (j.contains("prompt")) {
        if (!j["prompt"].is_string()) malformed("prompt is not a string");
        r.prompt = j["prompt"].get<std::string>();
    }
    if (j.contains("image")) r.image = image_from_json(j["image"]);
    if (j.contains("reference")) r.reference = numbers_from_json(j["reference"], "reference");
    return r;
}

std::string encode_response(const ScorerResponse& r) {
    json j{{"id", r.id}};
    if (r.gradient) j["gradient"] = image_to_json(*r.gradient);
    if (r.features) j["features"] = *r.features;
    if (r.score) j["score"] = *r.score;
    if (r.strings) j["strings"] = *r.strings;
    if (r.error) j["error"] = *r.error;
    return j.dump();
}

ScorerResponse decode_response(std::string_view text) {
    const json j = parse(text);
    if (!j.is_object()) malformed("response is not an object");
    ScorerResponse r;
    if (j.contains("id")) {
        if (!j["id"].is_string()) malformed("response id is not a string");
        r.id = j["id"].get<std::string>();
    }
    if (j.contains("error")) {
        r.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    }
    if (j.contains("gradient")) r.gradient = image_from_json(j["gradient"]);
    if (j.contains("features")) r.features = numbers_from_json(j["features"], "features");
    if (j.contains("score")) {
        if (!j["score"].is_number()) malformed("score is not a number");
        r.score = j["score"].get<double>();
    }
    if (j.contains("strings")) {
        if (!j["strings"].is_array()) malformed("strings is not an array");
        std::vector<std::string> s;
        for (const json& v : j["strings"]) {
            if (!v.is_string()) malformed("strings contains a non-string");
            s.push_back(v.get<std::string>());
        }
        r.strings = std::move(s);
    }
    return r;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    static constexpr char kTable[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = std::uint32_t(bytes[i]) << 16 | std::uint32_t(bytes[i + 1]) << 8 | bytes[i + 2];
        for (int s = 18; s >= 0; s -= 6) out.push_back(kTable[(v >> s) & 63]);
    }
    if (const std::size_t rest = bytes.size() - i; rest > 0) {
        std::uint32_t v = std::uint32_t(bytes[i]) << 16;
        if (rest == 2) v |= std::uint32_t(bytes[i + 1]) << 8;
        out.push_back(kTable[(v >> 18) & 63]);
        out.push_back(kTable[(v >> 12) & 63]);
        out.push_back(rest == 2 ? kTable[(v >> 6) & 63] : '=');
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) malformed("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        const bool last = i + 4 == text.size();
        int pad = 0;
        std::uint32_t v = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && last && k >= 2) {
                ++pad;
                v <<= 6;
                continue;
            }
            const int d = value(c);
            if (d < 0 || pad > 0) malformed("invalid base64 character");
            v = v << 6 | std::uint32_t(d);
        }
        out.push_back(std::uint8_t(v >> 16));
        if (pad < 2) out.push_back(std::uint8_t(v >> 8));
        if (pad < 1) out.push_back(std::uint8_t(v));
    }
    return out;
}

ScorerResponse Scorer::call(ScorerRequest request) const {
    if (request.id.empty()) request.id = "req-" + std::to_string(g_next_id.fetch_add(1));
    validate_request(request);
    ScorerResponse response = exchange(request);
    validate_response(request, response);
    return response;
}

SdsResult request_sds(const Scorer& scorer, const RasterImage& coverage, const std::string& prompt, std::int64_t seed) {
    ScorerRequest req;
    req.kind = RequestKind::sds_grad;
    req.prompt = prompt;
    req.image = to_wire_image(coverage);
    req.seed = seed;
    const ScorerResponse res = scorer.call(std::move(req));
    SdsResult out;
    out.gradient = coverage_gradient_from_wire(*res.gradient);
    double sq = 0.0;
    for (float g : res.gradient->data) sq += double(g) * double(g);
    const double hw = double(coverage.width) * double(coverage.height);
    out.proxy = hw * sq / 4.0;
    return out;
}

double request_clip_score(const Scorer& scorer, const RasterImage& coverage, const std::string& prompt) {
    ScorerRequest req;
    req.kind = RequestKind::clip_score;
    req.prompt = prompt;
    req.image = to_wire_image(coverage);
    return *scorer.call(std::move(req)).score;
}

std::vector<double> request_image_embedding(const Scorer& scorer, const RasterImage& coverage) {
    ScorerRequest req;
    req.kind = RequestKind::font_embed;
    req.image = to_wire_image(coverage);
    return *scorer.call(std::move(req)).features;
}

std::vector<double> request_text_embedding(const Scorer& scorer, const std::string& prompt) {
    ScorerRequest req;
    req.kind = RequestKind::font_embed;
    req.prompt = prompt;
    return *scorer.call(std::move(req)).features;
}

std::vector<std::string> request_strings(const Scorer& scorer, RequestKind kind, const std::string& prompt) {
    ScorerRequest req;
    req.kind = kind;
    req.prompt = prompt;
    return *scorer.call(std::move(req)).strings;
}

// ---------------------------------------------------------------- HTTP

HttpScorer::HttpScorer(std::string url, HttpScorerOptions options) : url_(std::move(url)), options_(std::move(options)) {
    const std::string_view u = url_;
    if (!u.starts_with("http://")) {
        throw ScorerError(ScorerError::Kind::usage, "scorer URL must start with http:// (got '" + url_ + "')");
    }
    const std::size_t slash = u.find('/', 7);
    host_ = std::string(u.substr(0, slash));
    std::string path = slash == std::string_view::npos ? "" : std::string(u.substr(slash));
    while (!path.empty() && path.back() == '/') path.pop_back();
    if (!path.ends_with("/v1/score")) path += "/v1/score";
    path_ = path;
    if (host_.size() <= 7) throw ScorerError(ScorerError::Kind::usage, "scorer URL has no host: '" + url_ + "'");
    if (options_.retries < 0 || !(options_.timeout_seconds > 0.0)) {
        throw ScorerError(ScorerError::Kind::usage, "scorer retries must be >= 0 and timeout > 0");
    }
    if (!options_.sleep) {
        options_.sleep = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
    }
}

ScorerResponse HttpScorer::exchange(const ScorerRequest& request) const {
    const std::string body = encode_request(request);
    const auto sec = static_cast<time_t>(options_.timeout_seconds);
    const auto usec = static_cast<time_t>((options_.timeout_seconds - double(sec)) * 1e6);

    auto attempt = [&]() -> ScorerResponse {
        httplib::Client client(host_);
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);
        const auto start = std::chrono::steady_clock::now();
        const auto res = client.Post(path_, body, "application/json");
        if (!res) {
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   (err == httplib::Error::Read && elapsed >= 0.9 * options_.timeout_seconds);
            throw ScorerError(timed_out ? ScorerError::Kind::timeout : ScorerError::Kind::transport,
                              "scorer " + url_ + ": " + (timed_out ? "timed out" : httplib::to_string(err)));
        }
        ScorerResponse decoded;
        try {
            decoded = decode_response(res->body);
        } catch (const ScorerError&) {
            if (res->status != 200) {
                throw ScorerError(ScorerError::Kind::server, "scorer " + url_ + " answered HTTP " + std::to_string(res->status));
            }
            throw;
        }
        if (res->status != 200 && !decoded.error) decoded.error = "HTTP " + std::to_string(res->status);
        return decoded;
    };

    double delay = options_.backoff_seconds;
    for (int i = 0;; ++i) {
        try {
            return attempt();
        } catch (const ScorerError& e) {
            if (!e.retriable() || i == options_.retries) {
                if (!e.retriable()) throw;
                throw ScorerError(e.kind(), std::string(e.what()) + " (after " + std::to_string(i + 1) + " attempts)");
            }
        }
        options_.sleep(delay);
        delay *= 2.0;
    }
}

// ---------------------------------------------------------------- builtin

namespace {

std::vector<double> image_statistics(const FilterBankExtractor& bank, const RasterImage& cov) {
    std::vector<double> e;
    const auto feats = bank.extract(cov);
    const std::size_t filters = bank.filter_count();
    const std::size_t cells = feats.size() / filters;
    for (std::size_t f = 0; f < filters; ++f) {
        double a = 0.0, q = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            a += std::abs(feats[f * cells + c]);
            q += feats[f * cells + c] * feats[f * cells + c];
        }
        e.push_back(a / double(cells));
        e.push_back(q / double(cells));
    }
    double mass = 0.0, mx = 0.0, my = 0.0;
    double partial = 0.0, solid = 0.0;
    for (int y = 0; y < cov.height; ++y) {
        for (int x = 0; x < cov.width; ++x) {
            const double v = cov.at(x, y);
            mass += v;
            mx += v * x;
            my += v * y;
            if (v >= 0.95) solid += 1.0;
            else if (v > 0.05) partial += 1.0;
        }
    }
    const double n = double(cov.size());
    e.push_back(mass / n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    if (mass > 0.0) {
        mx /= mass;
        my /= mass;
        for (int y = 0; y < cov.height; ++y) {
            for (int x = 0; x < cov.width; ++x) {
                const double v = cov.at(x, y);
                sxx += v * (x - mx) * (x - mx);
                syy += v * (y - my) * (y - my);
                sxy += v * (x - mx) * (y - my);
            }
        }
        const double norm = mass * n;
        sxx /= norm;
        syy /= norm;
        sxy /= norm;
    }
    e.push_back(sxx);
    e.push_back(syy);
    e.push_back(sxy);
    e.push_back(partial / n);
    e.push_back(solid / n);
    e.push_back(solid > 0.0 ? partial / solid : 0.0);
    e.resize(BuiltinScorer::kEmbeddingDim, 0.0);
    return e;
}

std::vector<double> text_statistics(std::string_view text) {
    std::vector<double> e(BuiltinScorer::kEmbeddingDim, 0.0);
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : word) h = (h ^ c) * 1099511628211ULL;
        e[h % e.size()] += (h >> 63) ? -1.0 : 1.0;
        word.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || (static_cast<unsigned char>(c) & 0x80)) {
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();
    bool any = false;
    for (double v : e) any = any || v != 0.0;
    if (!any) e[0] = 1.0;
    return e;
}

}  // namespace

ScorerResponse BuiltinScorer::exchange(const ScorerRequest& request) const {
    ScorerResponse r;
    r.id = request.id;
    switch (request.kind) {
        case RequestKind::sds_grad: {
            WireImage g = *request.image;
            std::fill(g.data.begin(), g.data.end(), 0.0f);
            r.gradient = std::move(g);
            break;
        }
        case RequestKind::features: {
            const RasterImage cov = coverage_from_wire(*request.image);
            if (request.reference) {
                const FeatureLoss loss = extractor_.compare(*request.reference, cov);
                r.features = extractor_.extract(cov);
                // d/d(channel value) = -d/d(coverage) / C
                WireImage g = *request.image;
                const std::size_t c = std::size_t(g.channels);
                for (std::size_t p = 0; p < cov.size(); ++p) {
                    for (std::size_t k = 0; k < c; ++k) g.data[p * c + k] = static_cast<float>(-loss.gradient.pixels[p] / double(c));
                }
                r.gradient = std::move(g);
            } else {
                r.features = extractor_.extract(cov);
            }
            break;
        }
        case RequestKind::clip_score:
            r.score = 0.0;
            break;
        case RequestKind::font_embed:
            r.features = request.image ? image_statistics(extractor_, coverage_from_wire(*request.image))
                                       : text_statistics(*request.prompt);
            break;
        case RequestKind::concepts:
        case RequestKind::font_attrs:
            r.error = std::string(name()) + " scorer has no language model; use offline prompts";
            break;
    }
    return r;
}

MockSdsScorer::MockSdsScorer(RasterImage target_coverage) : target_(std::move(target_coverage)) {
    if (target_.width < 1 || target_.height < 1) throw ImageError("mock scorer target is empty");
}

ScorerResponse MockSdsScorer::exchange(const ScorerRequest& request) const {
    if (request.kind != RequestKind::sds_grad && request.kind != RequestKind::clip_score) {
        return BuiltinScorer::exchange(request);
    }
    ScorerResponse r;
    r.id = request.id;
    const WireImage& img = *request.image;
    if (img.width != target_.width || img.height != target_.height) {
        r.error = "mock scorer target is " + std::to_string(target_.width) + "x" + std::to_string(target_.height) +
                  ", image is " + std::to_string(img.width) + "x" + std::to_string(img.height);
        return r;
    }
    const std::size_t c = std::size_t(img.channels);
    const double hw = double(img.width) * double(img.height);
    if (request.kind == RequestKind::sds_grad) {
        WireImage g = img;
        for (std::size_t p = 0; p < target_.size(); ++p) {
            const double t = static_cast<float>(1.0 - target_.pixels[p]);
            for (std::size_t k = 0; k < c; ++k) g.data[p * c + k] = static_cast<float>(2.0 * (img.data[p * c + k] - t) / hw);
        }
        r.gradient = std::move(g);
    } else {
        double sq = 0.0;
        for (std::size_t p = 0; p < target_.size(); ++p) {
            const double t = static_cast<float>(1.0 - target_.pixels[p]);
            for (std::size_t k = 0; k < c; ++k) sq += (img.data[p * c + k] - t) * (img.data[p * c + k] - t);
        }
        r.score = 1.0 - std::min(1.0, sq / (hw * double(c)));
    }
    return r;
}

// ---------------------------------------------------------------- remote OCR

std::size_t RemoteFeatureExtractor::feature_dim(int, int) const { return dim_.load(); }

std::vector<double> RemoteFeatureExtractor::extract(const RasterImage& image) const {
    ScorerRequest req;
    req.kind = RequestKind::features;
    req.image = to_wire_image(image);
    auto features = *scorer_.call(std::move(req)).features;
    dim_.store(features.size());
    return features;
}

FeatureLoss RemoteFeatureExtractor::compare(std::span<const double> reference, const RasterImage& current) const {
    ScorerRequest req;
    req.kind = RequestKind::features;
    req.image = to_wire_image(current);
    req.reference = std::vector<double>(reference.begin(), reference.end());
    const ScorerResponse res = scorer_.call(std::move(req));
    FeatureLoss out;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = (*res.features)[i] - reference[i];
        out.value += d * d;
    }
    out.value /= double(reference.size());
    out.gradient = coverage_gradient_from_wire(*res.gradient);
    return out;
}

std::unique_ptr<Scorer> make_scorer(const std::string& spec, HttpScorerOptions options) {
    if (spec == "builtin") return std::make_unique<BuiltinScorer>();
    if (spec.starts_with("mock:")) return std::make_unique<MockSdsScorer>(read_png(spec.substr(5)));
    if (spec.starts_with("http://")) return std::make_unique<HttpScorer>(spec, std::move(options));
    throw ScorerError(ScorerError::Kind::usage,
                      "unknown scorer '" + spec + "' (expected builtin, mock:<target.png> or http://host:port)");
}

}  // namespace khattat
