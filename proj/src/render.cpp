#include "ganimals/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <zlib.h>

#include "ganimals/error.hpp"

namespace ganimals {

using nlohmann::json;

RenderRequest RenderRequest::from_genome(const Genome& genome, std::uint32_t resolution) {
    return {genome.components(), genome.truncation(), genome.noise_seed(), resolution};
}

void RenderRequest::validate() const {
    if (class_weights.empty() || class_weights.size() > 4)
        fail(ErrorCode::RenderRejected, "render request needs 1 to 4 class weights");
    double total = 0.0;
    for (std::size_t i = 0; i < class_weights.size(); ++i) {
        const auto& c = class_weights[i];
        if (!(c.weight > 0.0) || !std::isfinite(c.weight))
            fail(ErrorCode::RenderRejected, "class weights must be positive");
        if (c.category < 0 || c.category > 999)
            fail(ErrorCode::RenderRejected, "class id out of range");
        if (i > 0 && class_weights[i - 1].category >= c.category)
            fail(ErrorCode::RenderRejected, "class ids must be distinct and ascending");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > kWeightTolerance)
        fail(ErrorCode::RenderRejected, "class weights must sum to 1");
    if (!(truncation > 0.0 && truncation <= 1.0))
        fail(ErrorCode::RenderRejected, "truncation must lie in (0, 1]");
    if (resolution < 1 || resolution > 4096)
        fail(ErrorCode::RenderRejected, "resolution must lie in 1..4096");
}

std::string canonical_serialization(const RenderRequest& request) {
    std::string out = "render-v1|res=" + std::to_string(request.resolution) +
                      "|trunc=" + format_real(request.truncation) +
                      "|seed=" + std::to_string(request.noise_seed) + "|";
    for (std::size_t i = 0; i < request.class_weights.size(); ++i) {
        if (i > 0)
            out += ",";
        out += std::to_string(request.class_weights[i].category) + ":" +
               format_real(request.class_weights[i].weight);
    }
    return out;
}

json to_wire_json(const RenderRequest& request) {
    json weights = json::array();
    for (const auto& c : request.class_weights)
        weights.push_back(json::array({c.category, format_real(c.weight)}));
    return json{{"class_weights", weights},
                {"truncation", request.truncation},
                {"noise_seed", request.noise_seed},
                {"resolution", request.resolution}};
}

RenderRequest request_from_wire_json(const json& body) {
    RenderRequest r;
    try {
        for (const auto& pair : body.at("class_weights")) {
            if (!pair.is_array() || pair.size() != 2)
                fail(ErrorCode::RenderRejected, "class weight entries must be [id, weight]");
            const auto& w = pair.at(1);
            double weight = w.is_string() ? std::stod(w.get<std::string>()) : w.get<double>();
            r.class_weights.push_back({pair.at(0).get<CategoryId>(), weight});
        }
        r.truncation = body.at("truncation").get<double>();
        r.noise_seed = body.at("noise_seed").get<std::uint64_t>();
        r.resolution = body.value("resolution", kDefaultResolution);
    } catch (const json::exception& e) {
        fail(ErrorCode::RenderRejected, std::string("malformed render request: ") + e.what());
    } catch (const std::logic_error& e) {
        fail(ErrorCode::RenderRejected, std::string("malformed weight: ") + e.what());
    }
    r.validate();
    return r;
}

json to_json(const ImageRef& ref) {
    return json{{"content_digest", ref.content_digest.hex()},
                {"uri", ref.uri},
                {"width", ref.width},
                {"height", ref.height}};
}

ImageRef image_ref_from_json(const json& j) {
    return {Digest256::from_hex(j.at("content_digest").get<std::string>()),
            j.at("uri").get<std::string>(), j.at("width").get<std::uint32_t>(),
            j.at("height").get<std::uint32_t>()};
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5], const std::vector<std::uint8_t>& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const auto crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

} // namespace

std::vector<std::uint8_t> encode_png_rgb(const std::vector<std::uint8_t>& rgb, std::uint32_t width,
                                         std::uint32_t height, const std::string& comment) {
    if (rgb.size() != std::size_t{width} * height * 3)
        fail(ErrorCode::PreconditionViolation, "pixel buffer does not match dimensions");

    std::vector<std::uint8_t> raw;
    raw.reserve(std::size_t{height} * (1 + std::size_t{width} * 3));
    for (std::uint32_t y = 0; y < height; ++y) {
        raw.push_back(0); // filter: none
        const auto row = rgb.begin() + static_cast<std::ptrdiff_t>(std::size_t{y} * width * 3);
        raw.insert(raw.end(), row, row + static_cast<std::ptrdiff_t>(width * 3));
    }

    std::vector<std::uint8_t> z = {0x78, 0x01};
    std::size_t pos = 0;
    do {
        const std::size_t len = std::min<std::size_t>(65535, raw.size() - pos);
        const bool last = pos + len == raw.size();
        z.push_back(last ? 1 : 0);
        z.push_back(static_cast<std::uint8_t>(len & 0xFF));
        z.push_back(static_cast<std::uint8_t>(len >> 8));
        z.push_back(static_cast<std::uint8_t>(~len & 0xFF));
        z.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos),
                 raw.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    } while (pos < raw.size());
    put_u32(z, static_cast<std::uint32_t>(adler32(1L, raw.data(), static_cast<uInt>(raw.size()))));

    std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, width);
    put_u32(ihdr, height);
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
    put_chunk(png, "IHDR", ihdr);
    if (!comment.empty()) {
        std::vector<std::uint8_t> text{'C', 'o', 'm', 'm', 'e', 'n', 't', 0};
        text.insert(text.end(), comment.begin(), comment.end());
        put_chunk(png, "tEXt", text);
    }
    put_chunk(png, "IDAT", z);
    put_chunk(png, "IEND", {});
    return png;
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> png_dimensions(const std::vector<std::uint8_t>& png) {
    static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (png.size() < 24 || !std::equal(kSig, kSig + 8, png.begin()) ||
        !std::equal(png.begin() + 12, png.begin() + 16, "IHDR"))
        return std::nullopt;
    return std::make_pair(read_u32(png.data() + 16), read_u32(png.data() + 20));
}

namespace {

struct Rgb {
    std::int64_t r, g, b;
};

// Each category owns a vertical gradient between two hashed colours.
std::pair<Rgb, Rgb> category_palette(CategoryId id) {
    const std::uint64_t h = mix64(static_cast<std::uint64_t>(id) * 0x100000001B3ULL + 0xC0FFEE);
    auto channel = [&](int shift) { return static_cast<std::int64_t>((h >> shift) & 0xFF); };
    return {{channel(0), channel(8), channel(16)}, {channel(24), channel(32), channel(40)}};
}

// Weights as 16.16 fixed point; the largest weight absorbs the rounding so
// the fixed-point weights sum to exactly 65536.
std::vector<std::int64_t> fixed_weights(const std::vector<Component>& components) {
    std::vector<std::int64_t> q;
    std::int64_t total = 0;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        q.push_back(std::llround(components[i].weight * 65536.0));
        total += q.back();
        if (components[i].weight > components[largest].weight)
            largest = i;
    }
    q[largest] += 65536 - total;
    return q;
}

std::uint32_t lattice_value(std::uint64_t seed, std::uint32_t gx, std::uint32_t gy) {
    return static_cast<std::uint32_t>(mix64(seed ^ mix64((std::uint64_t{gx} << 32) | gy)) & 0xFF);
}

} // namespace

std::vector<std::uint8_t> mock_palette_image(const RenderRequest& request) {
    request.validate();
    const std::uint32_t res = request.resolution;
    const auto q = fixed_weights(request.class_weights);
    std::vector<std::pair<Rgb, Rgb>> palettes;
    for (const auto& c : request.class_weights)
        palettes.push_back(category_palette(c.category));

    std::vector<std::uint8_t> out(std::size_t{res} * res * 3);
    const std::int64_t span = res > 1 ? res - 1 : 1;
    for (std::uint32_t y = 0; y < res; ++y) {
        std::int64_t r = 0, g = 0, b = 0;
        for (std::size_t i = 0; i < palettes.size(); ++i) {
            const auto& [top, bottom] = palettes[i];
            const std::int64_t t = y;
            const std::int64_t pr = (top.r * (span - t) + bottom.r * t) / span;
            const std::int64_t pg = (top.g * (span - t) + bottom.g * t) / span;
            const std::int64_t pb = (top.b * (span - t) + bottom.b * t) / span;
            r += q[i] * pr;
            g += q[i] * pg;
            b += q[i] * pb;
        }
        const auto rr = static_cast<std::uint8_t>((r + 32768) >> 16);
        const auto gg = static_cast<std::uint8_t>((g + 32768) >> 16);
        const auto bb = static_cast<std::uint8_t>((b + 32768) >> 16);
        for (std::uint32_t x = 0; x < res; ++x) {
            const std::size_t at = (std::size_t{y} * res + x) * 3;
            out[at] = rr;
            out[at + 1] = gg;
            out[at + 2] = bb;
        }
    }
    return out;
}

std::vector<std::uint8_t> mock_render(const RenderRequest& request) {
    auto pixels = mock_palette_image(request);
    const std::uint32_t res = request.resolution;
    const std::uint32_t cell = std::max<std::uint32_t>(1, res / 8);
    const std::int64_t contrast = std::max<std::int64_t>(1, std::llround(request.truncation * 256.0));
    for (std::uint32_t y = 0; y < res; ++y) {
        const std::uint32_t gy = y / cell;
        const std::int64_t fy = y % cell;
        for (std::uint32_t x = 0; x < res; ++x) {
            const std::uint32_t gx = x / cell;
            const std::int64_t fx = x % cell;
            const std::size_t at = (std::size_t{y} * res + x) * 3;
            for (std::uint32_t ch = 0; ch < 3; ++ch) {
                const std::uint64_t seed = request.noise_seed + ch;
                const std::int64_t v00 = lattice_value(seed, gx, gy);
                const std::int64_t v10 = lattice_value(seed, gx + 1, gy);
                const std::int64_t v01 = lattice_value(seed, gx, gy + 1);
                const std::int64_t v11 = lattice_value(seed, gx + 1, gy + 1);
                const std::int64_t top = v00 * (cell - fx) + v10 * fx;
                const std::int64_t bottom = v01 * (cell - fx) + v11 * fx;
                const std::int64_t noise = (top * (cell - fy) + bottom * fy) / (std::int64_t{cell} * cell);
                const std::int64_t value = pixels[at + ch] + (noise - 128) * contrast / 256;
                pixels[at + ch] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(value, 0, 255));
            }
        }
    }
    return encode_png_rgb(pixels, res, res, canonical_serialization(request));
}

RenderedImage MockBackend::render(const RenderRequest& request) {
    return {mock_render(request), request.resolution, request.resolution};
}

HttpBackend::HttpBackend(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

namespace {

httplib::Client make_client(const std::string& url, std::chrono::milliseconds timeout) {
    httplib::Client client(url);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    return client;
}

} // namespace

RenderedImage HttpBackend::render(const RenderRequest& request) {
    request.validate();
    auto client = make_client(base_url_, timeout_);
    auto res = client.Post("/render", to_wire_json(request).dump(), "application/json");
    if (!res)
        fail(ErrorCode::BackendUnavailable, "render worker unreachable: " + httplib::to_string(res.error()));
    if (res->status == 200) {
        std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
        auto dims = png_dimensions(bytes);
        if (!dims)
            fail(ErrorCode::BackendUnavailable, "render worker returned a non-PNG body");
        return {std::move(bytes), dims->first, dims->second};
    }
    if (res->status >= 400 && res->status < 500) {
        std::string reason = "status " + std::to_string(res->status);
        try {
            reason = json::parse(res->body).at("error").get<std::string>();
        } catch (const json::exception&) {
        }
        fail(ErrorCode::RenderRejected, "render worker rejected request: " + reason);
    }
    fail(ErrorCode::BackendUnavailable, "render worker answered status " + std::to_string(res->status));
}

std::string HttpBackend::health() const {
    auto client = make_client(base_url_, timeout_);
    auto res = client.Get("/healthz");
    if (!res || res->status != 200)
        fail(ErrorCode::BackendUnavailable, "render worker health check failed");
    try {
        auto body = json::parse(res->body);
        if (body.at("status").get<std::string>() != "ok")
            fail(ErrorCode::BackendUnavailable, "render worker reports not ok");
        return body.at("model").get<std::string>();
    } catch (const json::exception& e) {
        fail(ErrorCode::BackendUnavailable, std::string("bad /healthz body: ") + e.what());
    }
}

BackendCapabilities HttpBackend::capabilities() const {
    return {"http:" + base_url_, 1024, true};
}

ImageStore::ImageStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
}

Digest256 ImageStore::put(const std::vector<std::uint8_t>& bytes) {
    const auto digest = sha256(bytes);
    std::lock_guard lock(mu_);
    if (bytes_.contains(digest))
        return digest;
    if (dir_) {
        const auto path = *dir_ / (digest.hex() + ".png");
        if (!std::filesystem::exists(path)) {
            const auto tmp = path.string() + ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary);
                out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            }
            std::filesystem::rename(tmp, path);
        }
    }
    bytes_.emplace(digest, bytes);
    return digest;
}

std::optional<std::vector<std::uint8_t>> ImageStore::get(const Digest256& digest) const {
    std::lock_guard lock(mu_);
    if (auto it = bytes_.find(digest); it != bytes_.end())
        return it->second;
    if (dir_) {
        std::ifstream in(*dir_ / (digest.hex() + ".png"), std::ios::binary);
        if (in)
            return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
    }
    return std::nullopt;
}

bool ImageStore::contains(const Digest256& digest) const {
    std::lock_guard lock(mu_);
    return bytes_.contains(digest) || (dir_ && std::filesystem::exists(*dir_ / (digest.hex() + ".png")));
}

RenderCache::RenderCache(GeneratorBackend& backend, ImageStore& store, std::uint32_t resolution,
                         RetryPolicy retry)
    : backend_(backend), store_(store), resolution_(resolution), retry_(retry) {
    if (retry_.max_attempts < 1)
        fail(ErrorCode::ConfigError, "retry policy needs at least one attempt");
}

ImageRef RenderCache::render_with_retries(const Genome& genome) {
    const auto request = RenderRequest::from_genome(genome, resolution_);
    for (int attempt = 1;; ++attempt) {
        try {
            auto image = backend_.render(request);
            const auto digest = store_.put(image.png);
            return {digest, "/images/" + digest.hex() + ".png", image.width, image.height};
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BackendUnavailable)
                throw;
            if (attempt >= retry_.max_attempts)
                fail(ErrorCode::BackendUnavailable,
                     std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)");
        }
        if (retry_.backoff.count() > 0)
            std::this_thread::sleep_for(retry_.backoff * attempt);
    }
}

ImageRef RenderCache::render_cached(const Genome& genome) {
    const auto id = canonical_id(genome);
    std::promise<ImageRef> promise;
    std::shared_future<ImageRef> pending;
    bool owner = false;
    {
        std::lock_guard lock(mu_);
        if (auto it = entries_.find(id); it != entries_.end()) {
            pending = it->second;
        } else {
            pending = promise.get_future().share();
            entries_.emplace(id, pending);
            owner = true;
        }
    }
    if (!owner)
        return pending.get();
    try {
        auto ref = render_with_retries(genome);
        promise.set_value(ref);
        return ref;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mu_);
        entries_.erase(id);
        throw;
    }
}

void RenderCache::remember(const GanimalId& id, const ImageRef& ref) {
    std::promise<ImageRef> p;
    p.set_value(ref);
    std::lock_guard lock(mu_);
    entries_.insert_or_assign(id, p.get_future().share());
}

std::optional<ImageRef> RenderCache::lookup(const GanimalId& id) const {
    std::shared_future<ImageRef> f;
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(id);
        if (it == entries_.end())
            return std::nullopt;
        f = it->second;
    }
    if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready)
        return std::nullopt;
    return f.get();
}

} // namespace ganimals
