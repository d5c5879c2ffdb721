#ifndef GAL_CORE_HPP
#define GAL_CORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gal {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// malformed file header / content
struct FormatError : Error { using Error::Error; };
// payload shorter than the header promises
struct LengthError : Error { using Error::Error; };
// invalid argument or degenerate numeric input
struct ParamError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
// problem exceeds a hard enumeration bound
struct SizeError : Error { using Error::Error; };
// invariant violation inside the library (bug guard)
struct InternalError : Error { using Error::Error; };

// The seven geometric classes. Codes are stable: they appear raw in PGM
// label maps and in all probability vectors.
enum class GeometricClass : int {
    Support = 0,
    PlanarLeft = 1,
    PlanarCenter = 2,
    PlanarRight = 3,
    Porous = 4,
    Solid = 5,
    Sky = 6,
};

inline constexpr int kNumClasses = 7;

inline const char* class_name(int code) {
    static const char* names[kNumClasses] = {
        "support", "planar-left", "planar-center", "planar-right",
        "porous",  "solid",       "sky"};
    if (code < 0 || code >= kNumClasses) throw ParamError("class code out of range");
    return names[code];
}

// Display palette, one RGB triple per class code.
inline std::array<uint8_t, 3> class_color(int code) {
    static const std::array<uint8_t, 3> palette[kNumClasses] = {
        {0, 0, 0},        // support: black
        {255, 0, 255},    // planar-left: magenta
        {0, 0, 139},      // planar-center: dark blue
        {255, 0, 0},      // planar-right: red
        {0, 255, 0},      // porous: green
        {128, 128, 128},  // solid: gray
        {135, 206, 235},  // sky: light blue
    };
    if (code < 0 || code >= kNumClasses) throw ParamError("class code out of range");
    return palette[code];
}

// Channelled pixel grid in [0,1], row major, interleaved channels.
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 or 3
    std::vector<double> data;

    Raster() = default;
    Raster(int w, int h, int ch, double fill = 0.0)
        : width(w), height(h), channels(ch),
          data(static_cast<size_t>(w) * h * ch, fill) {
        validate();
    }

    double& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t size() const { return data.size(); }

    void validate() const {
        if (width <= 0 || height <= 0) throw ParamError("raster: non-positive dimensions");
        if (channels != 1 && channels != 3) throw ParamError("raster: channels must be 1 or 3");
        if (data.size() != static_cast<size_t>(width) * height * channels)
            throw InternalError("raster: data length mismatch");
        for (double v : data)
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw InternalError("raster: value outside [0,1]");
    }
};

// Per-pixel class codes 0..6.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> codes;

    LabelMap() = default;
    LabelMap(int w, int h, uint8_t fill = 0)
        : width(w), height(h), codes(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int x, int y) { return codes[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return codes[static_cast<size_t>(y) * width + x]; }

    void validate() const {
        if (width <= 0 || height <= 0) throw ParamError("label map: non-positive dimensions");
        if (codes.size() != static_cast<size_t>(width) * height)
            throw InternalError("label map: size mismatch");
        for (uint8_t c : codes)
            if (c >= kNumClasses) throw InternalError("label map: code out of range");
    }
};

// Probability vector over the seven classes; sums to 1.
struct ClassDistribution {
    std::array<double, kNumClasses> p{};

    double& operator[](int i) { return p[i]; }
    double operator[](int i) const { return p[i]; }

    double sum() const {
        double s = 0;
        for (double v : p) s += v;
        return s;
    }
    int argmax() const {
        return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    void validate() const {
        for (double v : p)
            if (!std::isfinite(v) || v < 0.0)
                throw InternalError("distribution: negative or non-finite entry");
        if (std::abs(sum() - 1.0) > 1e-6)
            throw InternalError("distribution: does not sum to 1");
    }
    static ClassDistribution uniform() {
        ClassDistribution d;
        d.p.fill(1.0 / kNumClasses);
        return d;
    }
    static ClassDistribution delta(int code) {
        ClassDistribution d;
        d.p[code] = 1.0;
        return d;
    }
};

inline ClassDistribution normalize_distribution(const std::array<double, kNumClasses>& raw) {
    double s = 0;
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0)
            throw ParamError("normalize: negative or non-finite input");
        s += v;
    }
    if (s <= 0.0) throw ParamError("normalize: all-zero input");
    ClassDistribution out;
    for (int i = 0; i < kNumClasses; ++i) out.p[i] = raw[i] / s;
    return out;
}

// ---- PNM (binary PPM/PGM, 8-bit) ----------------------------------------

namespace detail {

inline int pnm_read_token(std::istream& in) {
    // skip whitespace and '#' comments, then parse one unsigned integer
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw FormatError("pnm: bad header token");
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > 1 << 26) throw FormatError("pnm: header value too large");
        c = in.get();
    }
    if (c != EOF) in.unget();
    return static_cast<int>(v);
}

}  // namespace detail

inline Raster read_raster(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    int channels;
    if (m0 == 'P' && m1 == '5') channels = 1;
    else if (m0 == 'P' && m1 == '6') channels = 3;
    else throw FormatError("pnm: not a binary PGM/PPM: " + path);
    int w = detail::pnm_read_token(in);
    int h = detail::pnm_read_token(in);
    int maxval = detail::pnm_read_token(in);
    if (w <= 0 || h <= 0) throw FormatError("pnm: bad dimensions");
    if (maxval != 255) throw FormatError("pnm: only maxval 255 supported");
    in.get();  // single whitespace byte after the maxval token
    if (!in) throw FormatError("pnm: truncated header");
    std::vector<uint8_t> bytes(static_cast<size_t>(w) * h * channels);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<size_t>(in.gcount()) != bytes.size())
        throw LengthError("pnm: truncated payload in " + path);
    Raster r;
    r.width = w;
    r.height = h;
    r.channels = channels;
    r.data.resize(bytes.size());
    for (size_t i = 0; i < bytes.size(); ++i) r.data[i] = bytes[i] / 255.0;
    return r;
}

inline void write_raster(const Raster& img, const std::string& path) {
    img.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << (img.channels == 3 ? "P6" : "P5") << '\n'
        << img.width << ' ' << img.height << '\n'
        << "255\n";
    std::vector<uint8_t> bytes(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i)
        bytes[i] = static_cast<uint8_t>(std::lround(img.data[i] * 255.0));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

enum class LabelMapMode { Codes, Colors };

inline void write_label_map(const LabelMap& map, LabelMapMode mode, const std::string& path) {
    map.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    if (mode == LabelMapMode::Codes) {
        out << "P5\n" << map.width << ' ' << map.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(map.codes.data()),
                  static_cast<std::streamsize>(map.codes.size()));
    } else {
        out << "P6\n" << map.width << ' ' << map.height << "\n255\n";
        std::vector<uint8_t> bytes;
        bytes.reserve(map.codes.size() * 3);
        for (uint8_t c : map.codes) {
            auto rgb = class_color(c);
            bytes.insert(bytes.end(), rgb.begin(), rgb.end());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw IoError("short write to " + path);
}

inline LabelMap read_label_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw FormatError("label map: expected binary PGM");
    int w = detail::pnm_read_token(in);
    int h = detail::pnm_read_token(in);
    int maxval = detail::pnm_read_token(in);
    if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("label map: bad header");
    in.get();
    LabelMap map(w, h);
    in.read(reinterpret_cast<char*>(map.codes.data()),
            static_cast<std::streamsize>(map.codes.size()));
    if (static_cast<size_t>(in.gcount()) != map.codes.size())
        throw LengthError("label map: truncated payload");
    map.validate();
    return map;
}

}  // namespace gal

#endif
