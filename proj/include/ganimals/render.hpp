#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ganimals/genome.hpp"
#include "ganimals/hash.hpp"

namespace ganimals {

inline constexpr std::uint32_t kDefaultResolution = 256;

struct RenderRequest {
    std::vector<Component> class_weights; // sorted by category id
    double truncation = kDefaultTruncation;
    std::uint64_t noise_seed = 0;
    std::uint32_t resolution = kDefaultResolution;

    static RenderRequest from_genome(const Genome& genome, std::uint32_t resolution = kDefaultResolution);

    /// Same checks as Genome plus 1 <= resolution <= 4096; throws RenderRejected.
    void validate() const;

    friend bool operator==(const RenderRequest&, const RenderRequest&) = default;
};

/// `render-v1|res=<r>|trunc=<t>|seed=<s>|<id>:<w>,...`
std::string canonical_serialization(const RenderRequest& request);

/// Worker wire body. Weights travel as 17-significant-digit decimal strings.
nlohmann::json to_wire_json(const RenderRequest& request);
/// Throws RenderRejected on anything malformed.
RenderRequest request_from_wire_json(const nlohmann::json& body);

struct RenderedImage {
    std::vector<std::uint8_t> png;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
};

struct ImageRef {
    Digest256 content_digest;
    std::string uri;
    std::uint32_t width = 0;
    std::uint32_t height = 0;

    friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

nlohmann::json to_json(const ImageRef& ref);
ImageRef image_ref_from_json(const nlohmann::json& j);

struct BackendCapabilities {
    std::string name;
    std::uint32_t max_resolution = kDefaultResolution;
    bool supports_blend = true;
};

/// Image backend contract: identical requests must yield byte-identical
/// images. Transient failures raise BackendUnavailable; requests the backend
/// refuses raise RenderRejected.
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual RenderedImage render(const RenderRequest& request) = 0;
    virtual BackendCapabilities capabilities() const = 0;
};

/// Minimal 8-bit RGB PNG writer. Deflate stream uses stored blocks only, so
/// the bytes depend on nothing but the pixels and the text chunk.
std::vector<std::uint8_t> encode_png_rgb(const std::vector<std::uint8_t>& rgb, std::uint32_t width,
                                         std::uint32_t height, const std::string& comment = {});
/// Width and height from the IHDR chunk; nullopt when not a PNG.
std::optional<std::pair<std::uint32_t, std::uint32_t>> png_dimensions(const std::vector<std::uint8_t>& png);

/// Blended per-category palette before texturing, row-major RGB.
std::vector<std::uint8_t> mock_palette_image(const RenderRequest& request);
/// Deterministic procedural stand-in for a GAN: palette blend, value-noise
/// texture seeded from noise_seed, contrast scaled by truncation. Integer
/// arithmetic throughout.
std::vector<std::uint8_t> mock_render(const RenderRequest& request);

class MockBackend final : public GeneratorBackend {
public:
    RenderedImage render(const RenderRequest& request) override;
    BackendCapabilities capabilities() const override { return {"procedural-mock", 4096, true}; }
};

/// Client for the external render worker (POST /render, GET /healthz).
class HttpBackend final : public GeneratorBackend {
public:
    explicit HttpBackend(std::string base_url,
                         std::chrono::milliseconds timeout = std::chrono::seconds(30));

    RenderedImage render(const RenderRequest& request) override;
    BackendCapabilities capabilities() const override;
    /// Model name reported by /healthz; throws BackendUnavailable.
    std::string health() const;

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

/// Content-addressed image bytes, in memory and optionally mirrored to
/// `<dir>/<digest>.png`.
class ImageStore {
public:
    ImageStore() = default;
    explicit ImageStore(std::filesystem::path dir);

    Digest256 put(const std::vector<std::uint8_t>& bytes);
    std::optional<std::vector<std::uint8_t>> get(const Digest256& digest) const;
    bool contains(const Digest256& digest) const;

private:
    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mu_;
    std::unordered_map<Digest256, std::vector<std::uint8_t>> bytes_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff{0};
};

/// Render-once cache keyed by GanimalId. Concurrent requests for one genome
/// share a single backend call.
class RenderCache {
public:
    RenderCache(GeneratorBackend& backend, ImageStore& store, std::uint32_t resolution = kDefaultResolution,
                RetryPolicy retry = {});

    ImageRef render_cached(const Genome& genome);
    /// Restores a previously rendered reference (event replay).
    void remember(const GanimalId& id, const ImageRef& ref);
    std::optional<ImageRef> lookup(const GanimalId& id) const;

    std::uint32_t resolution() const noexcept { return resolution_; }

private:
    ImageRef render_with_retries(const Genome& genome);

    GeneratorBackend& backend_;
    ImageStore& store_;
    std::uint32_t resolution_;
    RetryPolicy retry_;
    mutable std::mutex mu_;
    std::unordered_map<GanimalId, std::shared_future<ImageRef>> entries_;
};

} // namespace ganimals
