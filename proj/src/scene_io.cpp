#include "holosim/scene_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

namespace holosim {

namespace fs = std::filesystem;

std::string format_double(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string{s.substr(first, last - first + 1)};
}

std::optional<double> parse_double(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
    Int v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        return std::nullopt;
    return v;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out)
        throw Error{ErrorCode::IoError, "cannot open " + path.string() + " for writing"};
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out)
        throw Error{ErrorCode::IoError, "write failed for " + path.string()};
}

std::string read_all(const fs::path& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw Error{ErrorCode::IoError, "cannot open " + path.string()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- PGM

struct PgmHeader {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 0;
    std::size_t data_offset = 0;
};

PgmHeader parse_pgm_header(const std::string& bytes, const fs::path& path) {
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw Error{ErrorCode::UnsupportedFormat, path.string() + " is not a PGM file"};
    if (bytes[1] != '5')
        throw Error{ErrorCode::UnsupportedFormat, path.string() + ": only binary PGM (P5) is supported"};

    std::size_t pos = 2;
    auto next_token = [&]() -> std::string {
        for (;;) {
            while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])))
                ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
                continue;
            }
            break;
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
            ++pos;
        return bytes.substr(start, pos - start);
    };

    PgmHeader h;
    const auto w = parse_int<std::size_t>(next_token());
    const auto ht = parse_int<std::size_t>(next_token());
    const auto mv = parse_int<unsigned>(next_token());
    if (!w || !ht || !mv || *w == 0 || *ht == 0 || *mv == 0 || *mv > 65535)
        throw Error{ErrorCode::CorruptHeader, path.string() + ": malformed PGM header"};
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw Error{ErrorCode::CorruptHeader, path.string() + ": PGM header not terminated"};
    h.width = *w;
    h.height = *ht;
    h.maxval = *mv;
    h.data_offset = pos + 1;
    return h;
}

void write_pgm(const fs::path& path, std::size_t width, std::size_t height, unsigned maxval,
               const std::string& payload) {
    auto out = open_out(path);
    out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    finish(out, path);
}

// ---------------------------------------------------------------- scene file

constexpr double default_tilt_x = std::numbers::pi / 180.0; // 1 degree

struct Entry {
    std::string value;
    std::size_t line = 0;
};

struct Section {
    std::string name;
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"scene", {"name"}},
        {"grid", {"nx", "ny", "pitch"}},
        {"optics", {"wavelengths", "pad_factor", "band_limit", "diffuse", "seed", "slice_mode"}},
        {"reference", {"amplitude", "tilt_x", "tilt_y", "phase_offset"}},
        {"mask", {"mode", "bias", "gain", "binary_threshold"}},
        {"lens", {"focal_length", "aperture_diameter"}},
        {"scan", {"chip_distance_min", "chip_distance_max"}},
        {"sweep", {"z_min", "z_max", "steps"}},
        {"window", {"center_x", "center_y", "width", "height", "z"}},
        {"slice", {"image", "depth", "extent", "channel"}},
    };
    return keys;
}

std::vector<Section> parse_sections(const std::string& text, const fs::path& path) {
    std::vector<Section> sections;
    std::istringstream in{text};
    std::string raw;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw Error{ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + msg};
    };
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line[0] == '#')
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("unterminated section header");
            auto name = trim(std::string_view{line}.substr(1, line.size() - 2));
            if (!known_keys().contains(name))
                fail("unknown section [" + name + "]");
            if (name != "slice")
                for (const auto& s : sections)
                    if (s.name == name)
                        fail("duplicate section [" + name + "]");
            sections.push_back(Section{name, line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("expected 'key = value'");
        if (sections.empty())
            fail("key outside of any section");
        auto key = trim(std::string_view{line}.substr(0, eq));
        auto value = trim(std::string_view{line}.substr(eq + 1));
        auto& section = sections.back();
        if (!known_keys().at(section.name).contains(key))
            fail("unknown key '" + key + "' in [" + section.name + "]");
        if (value.empty())
            fail("empty value for '" + key + "'");
        if (!section.entries.emplace(key, Entry{value, line_no}).second)
            fail("duplicate key '" + key + "' in [" + section.name + "]");
    }
    return sections;
}

class SectionReader {
public:
    SectionReader(const Section* section, const fs::path& path) : section_{section}, path_{path} {}

    bool has(const std::string& key) const { return section_ && section_->entries.contains(key); }

    double number(const std::string& key, double fallback) const {
        if (!has(key))
            return fallback;
        const auto& e = section_->entries.at(key);
        auto v = parse_double(e.value);
        if (!v || !std::isfinite(*v))
            parse_fail(key, e, "expected a finite number");
        return *v;
    }

    std::optional<double> number_or_auto(const std::string& key, std::optional<double> fallback) const {
        if (!has(key))
            return fallback;
        if (section_->entries.at(key).value == "auto")
            return std::nullopt;
        return number(key, 0.0);
    }

    template <class Int>
    Int integer(const std::string& key, Int fallback) const {
        if (!has(key))
            return fallback;
        const auto& e = section_->entries.at(key);
        auto v = parse_int<Int>(e.value);
        if (!v)
            parse_fail(key, e, "expected a non-negative integer");
        return *v;
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key))
            return fallback;
        const auto& e = section_->entries.at(key);
        if (e.value == "true")
            return true;
        if (e.value == "false")
            return false;
        parse_fail(key, e, "expected true or false");
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? section_->entries.at(key).value : fallback;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
        if (!has(key))
            return fallback;
        const auto& e = section_->entries.at(key);
        std::vector<double> out;
        std::string token;
        std::istringstream in{e.value};
        while (std::getline(in, token, ',')) {
            auto v = parse_double(trim(token));
            if (!v || !std::isfinite(*v))
                parse_fail(key, e, "expected a comma-separated list of numbers");
            out.push_back(*v);
        }
        return out;
    }

    [[noreturn]] void parse_fail(const std::string& key, const Entry& e, const std::string& msg) const {
        throw Error{ErrorCode::ParseError, path_.string() + ":" + std::to_string(e.line) + ": [" + section_->name +
                                               "] " + key + ": " + msg + " (got '" + e.value + "')"};
    }

private:
    const Section* section_;
    const fs::path& path_;
};

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
    throw Error{ErrorCode::ValidationError, field + ": " + msg};
}

void validate_config(const SceneConfig& c) {
    const auto& s = c.setup;
    if (s.nx < 2)
        invalid("[grid] nx", "must be at least 2");
    if (s.ny < 2)
        invalid("[grid] ny", "must be at least 2");
    if (!(s.pitch > 0.0))
        invalid("[grid] pitch", "must be positive");
    if (c.wavelengths.empty())
        invalid("[optics] wavelengths", "needs at least one wavelength");
    for (double w : c.wavelengths)
        if (!(w > 0.0))
            invalid("[optics] wavelengths", "every wavelength must be positive");
    const int pad = s.propagation.pad_factor;
    if (pad != 1 && pad != 2 && pad != 4)
        invalid("[optics] pad_factor", "must be 1, 2 or 4");

    const auto& r = c.reference;
    if (!(r.amplitude > 0.0))
        invalid("[reference] amplitude", "must be positive");
    if (!(std::abs(r.tilt_x) < std::numbers::pi / 2))
        invalid("[reference] tilt_x", "must be below pi/2 in magnitude");
    if (!(std::abs(r.tilt_y) < std::numbers::pi / 2))
        invalid("[reference] tilt_y", "must be below pi/2 in magnitude");

    const auto& m = c.mask;
    if (!(m.bias >= 0.0))
        invalid("[mask] bias", "must be non-negative");
    if (m.gain && !(*m.gain >= 0.0))
        invalid("[mask] gain", "must be non-negative or auto");
    if (!(m.binary_threshold > 0.0 && m.binary_threshold < 1.0))
        invalid("[mask] binary_threshold", "must lie in (0, 1)");

    if (c.lens) {
        if (!(c.lens->focal_length > 0.0))
            invalid("[lens] focal_length", "must be positive");
        if (!(c.lens->aperture_diameter > 0.0))
            invalid("[lens] aperture_diameter", "must be positive");
    }
    if (c.scan) {
        if (!c.lens)
            invalid("[scan]", "requires a [lens] section");
        if (!(c.lens->focal_length < c.scan->chip_distance_min))
            invalid("[scan] chip_distance_min", "must exceed the focal length");
        if (!(c.scan->chip_distance_min < c.scan->chip_distance_max))
            invalid("[scan] chip_distance_max", "must exceed chip_distance_min");
    }

    if (!(c.sweep.z_min > 0.0))
        invalid("[sweep] z_min", "must be positive (viewer side)");
    if (!(c.sweep.z_max > c.sweep.z_min))
        invalid("[sweep] z_max", "must exceed z_min");
    if (c.sweep.steps < 2)
        invalid("[sweep] steps", "must be at least 2");

    if (c.window) {
        const auto& w = c.window->window;
        if (!(w.width >= 0.0))
            invalid("[window] width", "must be non-negative");
        if (!(w.height >= 0.0))
            invalid("[window] height", "must be non-negative");
        if (!(c.window->z > 0.0))
            invalid("[window] z", "must be positive (viewer side)");
    }

    for (std::size_t i = 0; i < c.scene.slices.size(); ++i) {
        const auto& sl = c.scene.slices[i];
        const std::string where = "[slice] #" + std::to_string(i + 1) + " ";
        if (sl.channel && *sl.channel >= c.wavelengths.size())
            invalid(where + "channel", "exceeds the number of wavelengths");
        if (!(sl.extent > 0.0))
            invalid(where + "extent", "must be positive");
        const double height = sl.extent / static_cast<double>(sl.intensity.width) *
                              static_cast<double>(sl.intensity.height);
        if (sl.extent > s.pitch * static_cast<double>(s.nx) * (1 + 1e-9) ||
            height > s.pitch * static_cast<double>(s.ny) * (1 + 1e-9))
            invalid(where + "extent", "slice is larger than the grid");
    }
    try {
        c.scene.validate();
    } catch (const Error& e) {
        invalid("[slice]", e.detail());
    }
}

} // namespace

// ---------------------------------------------------------------- images

Image read_slice_image(const fs::path& path) {
    const auto bytes = read_all(path);
    const auto h = parse_pgm_header(bytes, path);
    const std::size_t bytes_per_sample = h.maxval > 255 ? 2 : 1;
    const std::size_t count = h.width * h.height;
    if (bytes.size() - h.data_offset < count * bytes_per_sample)
        throw Error{ErrorCode::TruncatedPayload, path.string() + ": PGM pixel data is truncated"};

    Image img{h.width, h.height, std::vector<double>(count)};
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + h.data_offset);
    const double scale = 1.0 / static_cast<double>(h.maxval);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned raw = bytes_per_sample == 2 ? (unsigned{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
        if (raw > h.maxval)
            throw Error{ErrorCode::CorruptHeader, path.string() + ": sample exceeds maxval"};
        img.pixels[i] = static_cast<double>(raw) * scale;
    }
    return img;
}

void write_pgm16(const fs::path& path, std::size_t width, std::size_t height, std::span<const std::uint16_t> pixels) {
    if (pixels.size() != width * height)
        throw Error{ErrorCode::InvalidArgument, "pixel count does not match image size"};
    std::string payload(pixels.size() * 2, '\0');
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        payload[2 * i] = static_cast<char>(pixels[i] >> 8);
        payload[2 * i + 1] = static_cast<char>(pixels[i] & 0xFF);
    }
    write_pgm(path, width, height, 65535, payload);
}

void write_pgm8(const fs::path& path, std::size_t width, std::size_t height, std::span<const std::uint8_t> pixels) {
    if (pixels.size() != width * height)
        throw Error{ErrorCode::InvalidArgument, "pixel count does not match image size"};
    write_pgm(path, width, height, 255, std::string(pixels.begin(), pixels.end()));
}

std::vector<std::uint16_t> quantize_intensity(const IntensityMap& map, ImageScaling scaling) {
    double peak = 0.0;
    for (double v : map.samples())
        peak = std::max(peak, v);
    std::vector<std::uint16_t> out(map.size(), 0);
    if (!(peak > 0.0))
        return out;
    auto src = map.samples();
    if (scaling == ImageScaling::Linear) {
        for (std::size_t i = 0; i < src.size(); ++i)
            out[i] = static_cast<std::uint16_t>(std::round(65535.0 * std::max(src[i], 0.0) / peak));
    } else {
        const double eps = 1e-12 * peak;
        const double denom = std::log1p(peak / eps);
        for (std::size_t i = 0; i < src.size(); ++i)
            out[i] = static_cast<std::uint16_t>(std::round(65535.0 * std::log1p(std::max(src[i], 0.0) / eps) / denom));
    }
    return out;
}

void write_intensity_image(const IntensityMap& map, const fs::path& path, ImageScaling scaling) {
    const auto px = quantize_intensity(map, scaling);
    write_pgm16(path, map.nx(), map.ny(), px);
}

// ---------------------------------------------------------------- field dumps

namespace {
constexpr std::string_view field_magic = "HOLOSIM-FIELD 1";
}

void write_field(const ComplexField& field, const fs::path& path) {
    const auto& g = field.geometry();
    std::ostringstream header;
    header << field_magic << '\n'
           << "nx " << g.nx << '\n'
           << "ny " << g.ny << '\n'
           << "pitch " << format_double(g.pitch) << '\n'
           << "wavelength " << format_double(g.wavelength) << '\n'
           << "plane_z " << format_double(g.plane_z) << '\n'
           << "endianness little\n"
           << "end\n";
    std::string payload(field.size() * 16, '\0');
    auto samples = field.samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double parts[2] = {samples[i].real(), samples[i].imag()};
        for (int k = 0; k < 2; ++k) {
            auto bits = std::bit_cast<std::uint64_t>(parts[k]);
            for (int b = 0; b < 8; ++b)
                payload[i * 16 + static_cast<std::size_t>(k) * 8 + static_cast<std::size_t>(b)] =
                    static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
    }
    auto out = open_out(path);
    const auto h = header.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    finish(out, path);
}

ComplexField read_field(const fs::path& path) {
    const auto bytes = read_all(path);
    std::size_t pos = 0;
    auto next_line = [&]() -> std::optional<std::string> {
        const auto nl = bytes.find('\n', pos);
        if (nl == std::string::npos)
            return std::nullopt;
        auto line = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    auto bad = [&](const std::string& msg) {
        throw Error{ErrorCode::HeaderMismatch, path.string() + ": " + msg};
    };

    auto magic = next_line();
    if (!magic || *magic != field_magic)
        bad("missing field-dump magic line");
    std::map<std::string, std::string> header;
    for (;;) {
        auto line = next_line();
        if (!line)
            bad("header is not terminated by 'end'");
        if (*line == "end")
            break;
        const auto sp = line->find(' ');
        if (sp == std::string::npos)
            bad("malformed header line '" + *line + "'");
        header[line->substr(0, sp)] = line->substr(sp + 1);
    }
    auto get = [&](const std::string& key) {
        if (!header.contains(key))
            bad("header lacks '" + key + "'");
        return header.at(key);
    };
    auto nx = parse_int<std::size_t>(get("nx"));
    auto ny = parse_int<std::size_t>(get("ny"));
    auto pitch = parse_double(get("pitch"));
    auto wavelength = parse_double(get("wavelength"));
    auto plane_z = parse_double(get("plane_z"));
    const auto endian = get("endianness");
    if (!nx || !ny || !pitch || !wavelength || !plane_z)
        bad("unparseable header value");
    if (endian != "little" && endian != "big")
        bad("endianness must be little or big");

    PlaneGeometry g{*nx, *ny, *pitch, *wavelength, *plane_z};
    try {
        g.validate();
    } catch (const Error& e) {
        bad(e.detail());
    }
    const std::size_t expected = g.size() * 16;
    const std::size_t available = bytes.size() - pos;
    if (available < expected)
        throw Error{ErrorCode::TruncatedPayload, path.string() + ": payload has " + std::to_string(available) +
                                                     " bytes, header implies " + std::to_string(expected)};
    if (available > expected)
        bad("payload is longer than the header's nx*ny implies");

    ComplexField field{g};
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    const bool little = endian == "little";
    auto samples = field.samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double parts[2];
        for (int k = 0; k < 2; ++k) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) {
                const std::size_t idx = i * 16 + static_cast<std::size_t>(k) * 8 +
                                        static_cast<std::size_t>(little ? b : 7 - b);
                bits |= std::uint64_t{p[idx]} << (8 * b);
            }
            parts[k] = std::bit_cast<double>(bits);
        }
        samples[i] = complex{parts[0], parts[1]};
    }
    return field;
}

// ---------------------------------------------------------------- scene files

OpticalSetup SceneConfig::setup_for(std::size_t channel) const {
    OpticalSetup s = setup;
    s.wavelength = wavelengths.at(channel);
    return s;
}

SceneConfig load_scene(const fs::path& path) {
    const auto text = read_all(path);
    const auto sections = parse_sections(text, path);
    auto find = [&](const std::string& name) -> const Section* {
        for (const auto& s : sections)
            if (s.name == name)
                return &s;
        return nullptr;
    };
    const fs::path base = fs::absolute(path).parent_path();

    SceneConfig c;
    SectionReader scene{find("scene"), path};
    c.scene.name = scene.text("name", path.stem().string());

    SectionReader grid{find("grid"), path};
    c.setup.nx = grid.integer<std::size_t>("nx", 1024);
    c.setup.ny = grid.integer<std::size_t>("ny", 1024);
    c.setup.pitch = grid.number("pitch", 8e-6);

    SectionReader optics{find("optics"), path};
    c.wavelengths = optics.numbers("wavelengths", {532e-9});
    c.setup.wavelength = c.wavelengths.empty() ? 0.0 : c.wavelengths.front();
    c.setup.propagation.pad_factor = optics.integer<int>("pad_factor", 2);
    c.setup.propagation.band_limit = optics.boolean("band_limit", true);
    c.setup.diffuse = optics.boolean("diffuse", true);
    c.setup.seed = optics.integer<std::uint64_t>("seed", 0);
    const auto mode = optics.text("slice_mode", "coherent");
    if (mode == "coherent")
        c.setup.slice_mode = SliceMode::Coherent;
    else if (mode == "incoherent")
        c.setup.slice_mode = SliceMode::Incoherent;
    else
        invalid("[optics] slice_mode", "must be coherent or incoherent");

    SectionReader reference{find("reference"), path};
    const auto amplitude = reference.number_or_auto("amplitude", 1.0);
    c.reference_amplitude_auto = !amplitude.has_value();
    c.reference.amplitude = amplitude.value_or(1.0);
    c.reference.tilt_x = reference.number("tilt_x", default_tilt_x);
    c.reference.tilt_y = reference.number("tilt_y", 0.0);
    c.reference.phase_offset = reference.number("phase_offset", 0.0);

    SectionReader mask{find("mask"), path};
    const auto mask_mode = mask.text("mode", "linear");
    if (mask_mode == "linear")
        c.mask.mode = MaskMode::Linear;
    else if (mask_mode == "binary")
        c.mask.mode = MaskMode::Binary;
    else
        invalid("[mask] mode", "must be linear or binary");
    c.mask.bias = mask.number("bias", 0.0);
    c.mask.gain = mask.number_or_auto("gain", std::nullopt);
    c.mask.binary_threshold = mask.number("binary_threshold", 0.5);

    if (const auto* s = find("lens")) {
        SectionReader lens{s, path};
        c.lens = LensSpec{lens.number("focal_length", 5e-3), lens.number("aperture_diameter", 4e-3)};
    }
    if (const auto* s = find("scan")) {
        SectionReader scan{s, path};
        if (!scan.has("chip_distance_min") || !scan.has("chip_distance_max"))
            invalid("[scan]", "needs chip_distance_min and chip_distance_max");
        c.scan = ScanSpec{scan.number("chip_distance_min", 0.0), scan.number("chip_distance_max", 0.0)};
    }

    for (const auto& s : sections) {
        if (s.name != "slice")
            continue;
        SectionReader sl{&s, path};
        const std::string where = "[slice] at line " + std::to_string(s.line) + " ";
        if (!sl.has("image"))
            invalid(where + "image", "is required");
        if (!sl.has("depth"))
            invalid(where + "depth", "is required");
        if (!sl.has("extent"))
            invalid(where + "extent", "is required");
        fs::path image = sl.text("image", "");
        if (image.is_relative())
            image = base / image;
        image = image.lexically_normal();
        Slice slice;
        try {
            slice.intensity = read_slice_image(image);
        } catch (const Error& e) {
            invalid(where + "image", e.what());
        }
        slice.depth = sl.number("depth", 0.0);
        slice.extent = sl.number("extent", 0.0);
        if (sl.has("channel"))
            slice.channel = sl.integer<std::size_t>("channel", 0);
        c.scene.slices.push_back(std::move(slice));
        c.slice_images.push_back(image);
    }
    if (c.scene.slices.empty())
        invalid("[slice]", "scene needs at least one slice");

    double nearest = 1e300;
    double farthest = 0.0;
    for (const auto& sl : c.scene.slices) {
        nearest = std::min(nearest, std::abs(sl.depth));
        farthest = std::max(farthest, std::abs(sl.depth));
    }
    SectionReader sweep{find("sweep"), path};
    c.sweep.z_min = sweep.number("z_min", 0.5 * nearest);
    c.sweep.z_max = sweep.number("z_max", 1.5 * farthest);
    c.sweep.steps = sweep.integer<std::size_t>("steps", 41);

    if (const auto* s = find("window")) {
        SectionReader w{s, path};
        WindowSpec ws;
        ws.window.center_x = w.number("center_x", 0.0);
        ws.window.center_y = w.number("center_y", 0.0);
        ws.window.width = w.number("width", 0.0);
        ws.window.height = w.number("height", 0.0);
        ws.z = w.number("z", 0.5 * (c.sweep.z_min + c.sweep.z_max));
        c.window = ws;
    }

    validate_config(c);
    return c;
}

void save_scene(const SceneConfig& c, const fs::path& path) {
    std::ostringstream out;
    const auto& s = c.setup;
    out << "# holosim scene\n\n[scene]\nname = " << c.scene.name << "\n\n";
    out << "[grid]\nnx = " << s.nx << "\nny = " << s.ny << "\npitch = " << format_double(s.pitch) << "\n\n";
    out << "[optics]\nwavelengths = ";
    for (std::size_t i = 0; i < c.wavelengths.size(); ++i)
        out << (i ? ", " : "") << format_double(c.wavelengths[i]);
    out << "\npad_factor = " << s.propagation.pad_factor
        << "\nband_limit = " << (s.propagation.band_limit ? "true" : "false")
        << "\ndiffuse = " << (s.diffuse ? "true" : "false") << "\nseed = " << s.seed
        << "\nslice_mode = " << (s.slice_mode == SliceMode::Coherent ? "coherent" : "incoherent") << "\n\n";
    out << "[reference]\namplitude = "
        << (c.reference_amplitude_auto ? std::string{"auto"} : format_double(c.reference.amplitude))
        << "\ntilt_x = " << format_double(c.reference.tilt_x) << "\ntilt_y = " << format_double(c.reference.tilt_y)
        << "\nphase_offset = " << format_double(c.reference.phase_offset) << "\n\n";
    out << "[mask]\nmode = " << (c.mask.mode == MaskMode::Linear ? "linear" : "binary")
        << "\nbias = " << format_double(c.mask.bias)
        << "\ngain = " << (c.mask.gain ? format_double(*c.mask.gain) : std::string{"auto"})
        << "\nbinary_threshold = " << format_double(c.mask.binary_threshold) << "\n\n";
    if (c.lens)
        out << "[lens]\nfocal_length = " << format_double(c.lens->focal_length)
            << "\naperture_diameter = " << format_double(c.lens->aperture_diameter) << "\n\n";
    if (c.scan)
        out << "[scan]\nchip_distance_min = " << format_double(c.scan->chip_distance_min)
            << "\nchip_distance_max = " << format_double(c.scan->chip_distance_max) << "\n\n";
    out << "[sweep]\nz_min = " << format_double(c.sweep.z_min) << "\nz_max = " << format_double(c.sweep.z_max)
        << "\nsteps = " << c.sweep.steps << "\n\n";
    if (c.window)
        out << "[window]\ncenter_x = " << format_double(c.window->window.center_x)
            << "\ncenter_y = " << format_double(c.window->window.center_y)
            << "\nwidth = " << format_double(c.window->window.width)
            << "\nheight = " << format_double(c.window->window.height) << "\nz = " << format_double(c.window->z)
            << "\n\n";
    for (std::size_t i = 0; i < c.scene.slices.size(); ++i) {
        const auto& sl = c.scene.slices[i];
        out << "[slice]\nimage = " << c.slice_images.at(i).string() << "\ndepth = " << format_double(sl.depth)
            << "\nextent = " << format_double(sl.extent) << "\n";
        if (sl.channel)
            out << "channel = " << *sl.channel << "\n";
        out << "\n";
    }
    auto file = open_out(path);
    const auto text = out.str();
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    finish(file, path);
}

// ---------------------------------------------------------------- reports

namespace {

const std::vector<std::pair<std::string, double ReconstructionReport::*>>& report_scalars() {
    static const std::vector<std::pair<std::string, double ReconstructionReport::*>> rows{
        {"focus_depth", &ReconstructionReport::focus_depth},
        {"focus_x", &ReconstructionReport::focus_x},
        {"focus_y", &ReconstructionReport::focus_y},
        {"peak_intensity", &ReconstructionReport::peak_intensity},
        {"peak_to_mean", &ReconstructionReport::peak_to_mean},
        {"ncc", &ReconstructionReport::ncc},
        {"speckle_contrast", &ReconstructionReport::speckle_contrast},
        {"solid_angle_sr", &ReconstructionReport::solid_angle_sr},
    };
    return rows;
}

} // namespace

void write_report(const ReconstructionReport& report, const fs::path& path) {
    std::ostringstream out;
    out << "key,value\n";
    for (const auto& [key, member] : report_scalars())
        out << key << ',' << format_double(report.*member) << '\n';
    for (const auto& [key, value] : report.power_fractions)
        out << "fraction." << key << ',' << format_double(value) << '\n';
    for (const auto& [key, value] : report.provenance) {
        if (value.find_first_of(",\n") != std::string::npos)
            throw Error{ErrorCode::InvalidArgument, "provenance value for " + key + " contains a comma or newline"};
        out << "config." << key << ',' << value << '\n';
    }
    auto file = open_out(path);
    const auto text = out.str();
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    finish(file, path);
}

ReconstructionReport read_report(const fs::path& path) {
    const auto text = read_all(path);
    std::istringstream in{text};
    std::string line;
    std::size_t line_no = 0;
    ReconstructionReport report;
    auto fail = [&](const std::string& msg) {
        throw Error{ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + msg};
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "key,value")
                fail("missing 'key,value' header");
            continue;
        }
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            fail("expected key,value");
        const auto key = line.substr(0, comma);
        const auto value = line.substr(comma + 1);
        if (key.starts_with("config.")) {
            report.provenance[key.substr(7)] = value;
            continue;
        }
        const auto v = parse_double(value);
        if (!v)
            fail("value for " + key + " is not a number");
        if (key.starts_with("fraction.")) {
            report.power_fractions[key.substr(9)] = *v;
            continue;
        }
        bool matched = false;
        for (const auto& [name, member] : report_scalars())
            if (name == key) {
                report.*member = *v;
                matched = true;
            }
        if (!matched)
            fail("unknown report key " + key);
    }
    return report;
}

} // namespace holosim
