#include "skycolor/image_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <memory>
#include <set>
#include <sstream>

#include <csetjmp>

#include <jpeglib.h>
#include <png.h>

namespace skycolor::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) {
        if (mode[0] == 'r') throw MissingFile(path.string());
        throw Error("cannot open for writing: " + path.string());
    }
    return f;
}

bool is_png_signature(const unsigned char* bytes, size_t n) {
    static const unsigned char magic[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    return n >= 8 && std::memcmp(bytes, magic, 8) == 0;
}

bool is_jpeg_signature(const unsigned char* bytes, size_t n) {
    return n >= 2 && bytes[0] == 0xff && bytes[1] == 0xd8;
}

// libpng reports errors through longjmp; decode state lives in this frame so
// the jump lands before any C++ throw.
struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw Error("libpng initialization failed");
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw Error("libpng initialization failed");
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;
};

void check_no_alpha(const std::filesystem::path& path, int color_type, png_structp png,
                    png_infop info) {
    if (color_type & PNG_COLOR_MASK_ALPHA)
        throw DecodeError("alpha channel not supported: " + path.string());
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        throw DecodeError("alpha channel (tRNS) not supported: " + path.string());
}

RgbImage decode_png_rgb(const std::filesystem::path& path, std::FILE* file) {
    PngReader reader;
    RgbImage image;
    std::vector<png_bytep> row_pointers;

    if (setjmp(png_jmpbuf(reader.png)))
        throw DecodeError("PNG decode failed: " + path.string());

    png_init_io(reader.png, file);
    png_read_info(reader.png, reader.info);

    const int bit_depth = png_get_bit_depth(reader.png, reader.info);
    const int color_type = png_get_color_type(reader.png, reader.info);
    if (bit_depth == 16) throw DecodeError("16-bit input not supported: " + path.string());
    check_no_alpha(path, color_type, reader.png, reader.info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(reader.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(reader.png);
    if (color_type == PNG_COLOR_TYPE_GRAY) png_set_gray_to_rgb(reader.png);
    png_set_interlace_handling(reader.png);
    png_read_update_info(reader.png, reader.info);

    image.width = static_cast<int>(png_get_image_width(reader.png, reader.info));
    image.height = static_cast<int>(png_get_image_height(reader.png, reader.info));
    if (png_get_channels(reader.png, reader.info) != 3)
        throw DecodeError("unexpected channel count in " + path.string());

    image.rgb.resize(static_cast<size_t>(image.width) * image.height * 3);
    row_pointers.resize(static_cast<size_t>(image.height));
    for (int y = 0; y < image.height; ++y)
        row_pointers[static_cast<size_t>(y)] =
            image.rgb.data() + static_cast<size_t>(y) * image.width * 3;
    png_read_image(reader.png, row_pointers.data());
    png_read_end(reader.png, nullptr);
    return image;
}

GrayImage decode_png_gray(const std::filesystem::path& path, std::FILE* file) {
    PngReader reader;
    GrayImage image;
    std::vector<png_bytep> row_pointers;

    if (setjmp(png_jmpbuf(reader.png)))
        throw DecodeError("PNG decode failed: " + path.string());

    png_init_io(reader.png, file);
    png_read_info(reader.png, reader.info);

    const int bit_depth = png_get_bit_depth(reader.png, reader.info);
    const int color_type = png_get_color_type(reader.png, reader.info);
    if (bit_depth == 16) throw DecodeError("16-bit input not supported: " + path.string());
    check_no_alpha(path, color_type, reader.png, reader.info);
    if (color_type != PNG_COLOR_TYPE_GRAY)
        throw DecodeError("expected grayscale PNG: " + path.string());
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(reader.png);
    png_set_interlace_handling(reader.png);
    png_read_update_info(reader.png, reader.info);

    image.width = static_cast<int>(png_get_image_width(reader.png, reader.info));
    image.height = static_cast<int>(png_get_image_height(reader.png, reader.info));
    image.pixels.resize(static_cast<size_t>(image.width) * image.height);
    row_pointers.resize(static_cast<size_t>(image.height));
    for (int y = 0; y < image.height; ++y)
        row_pointers[static_cast<size_t>(y)] =
            image.pixels.data() + static_cast<size_t>(y) * image.width;
    png_read_image(reader.png, row_pointers.data());
    png_read_end(reader.png, nullptr);
    return image;
}

struct JpegErrorMgr {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

RgbImage decode_jpeg_rgb(const std::filesystem::path& path, std::FILE* file) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;

    RgbImage image;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw DecodeError("JPEG decode failed: " + path.string() + " (" + err.message + ")");
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    if (cinfo.output_components != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw DecodeError("unsupported JPEG color space: " + path.string());
    }
    image.width = static_cast<int>(cinfo.output_width);
    image.height = static_cast<int>(cinfo.output_height);
    image.rgb.resize(static_cast<size_t>(image.width) * image.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row =
            image.rgb.data() + static_cast<size_t>(cinfo.output_scanline) * image.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return image;
}

}  // namespace

RgbImage load_rgb8(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    unsigned char header[8] = {};
    const size_t n = std::fread(header, 1, sizeof(header), file.get());
    std::rewind(file.get());
    if (is_png_signature(header, n)) return decode_png_rgb(path, file.get());
    if (is_jpeg_signature(header, n)) return decode_jpeg_rgb(path, file.get());
    throw DecodeError("unrecognized image format: " + path.string());
}

GrayImage load_gray8_png(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    unsigned char header[8] = {};
    const size_t n = std::fread(header, 1, sizeof(header), file.get());
    std::rewind(file.get());
    if (!is_png_signature(header, n)) throw DecodeError("not a PNG file: " + path.string());
    return decode_png_gray(path, file.get());
}

SegmentationMask load_truth_mask(const std::filesystem::path& path) {
    const GrayImage gray = load_gray8_png(path);
    SegmentationMask mask;
    mask.width = gray.width;
    mask.height = gray.height;
    mask.labels.resize(gray.pixels.size());
    std::set<int> offending;
    for (size_t i = 0; i < gray.pixels.size(); ++i) {
        const std::uint8_t v = gray.pixels[i];
        if (v == 0)
            mask.labels[i] = 0;
        else if (v == 255)
            mask.labels[i] = 1;
        else
            offending.insert(v);
    }
    if (!offending.empty()) {
        std::string values;
        for (int v : offending) {
            if (!values.empty()) values += ", ";
            values += std::to_string(v);
        }
        throw NonBinaryTruth("truth image " + path.string() +
                             " contains non-binary values: " + values);
    }
    mask.provenance = "truth:" + path.filename().string();
    return mask;
}

void save_png_rgb8(const std::filesystem::path& path, const RgbImage& image) {
    FilePtr file = open_file(path, "wb");
    PngWriter writer;
    std::vector<png_bytep> row_pointers(static_cast<size_t>(image.height));

    if (setjmp(png_jmpbuf(writer.png))) throw Error("PNG write failed: " + path.string());

    png_init_io(writer.png, file.get());
    png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(writer.png, writer.info);
    for (int y = 0; y < image.height; ++y)
        row_pointers[static_cast<size_t>(y)] = const_cast<png_bytep>(
            image.rgb.data() + static_cast<size_t>(y) * image.width * 3);
    png_write_image(writer.png, row_pointers.data());
    png_write_end(writer.png, nullptr);
}

void save_png_gray8(const std::filesystem::path& path, const GrayImage& image) {
    FilePtr file = open_file(path, "wb");
    PngWriter writer;
    std::vector<png_bytep> row_pointers(static_cast<size_t>(image.height));

    if (setjmp(png_jmpbuf(writer.png))) throw Error("PNG write failed: " + path.string());

    png_init_io(writer.png, file.get());
    png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(writer.png, writer.info);
    for (int y = 0; y < image.height; ++y)
        row_pointers[static_cast<size_t>(y)] = const_cast<png_bytep>(
            image.pixels.data() + static_cast<size_t>(y) * image.width);
    png_write_image(writer.png, row_pointers.data());
    png_write_end(writer.png, nullptr);
}

void save_png_mask(const std::filesystem::path& path, const SegmentationMask& mask) {
    FilePtr file = open_file(path, "wb");
    PngWriter writer;

    // pack to 1-bit rows, cloud = 1 = white
    const int stride = (mask.width + 7) / 8;
    std::vector<std::uint8_t> packed(static_cast<size_t>(stride) * mask.height, 0);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.cloud(y * mask.width + x))
                packed[static_cast<size_t>(y) * stride + x / 8] |=
                    static_cast<std::uint8_t>(0x80u >> (x % 8));
    std::vector<png_bytep> row_pointers(static_cast<size_t>(mask.height));
    for (int y = 0; y < mask.height; ++y)
        row_pointers[static_cast<size_t>(y)] = packed.data() + static_cast<size_t>(y) * stride;

    if (setjmp(png_jmpbuf(writer.png))) throw Error("PNG write failed: " + path.string());

    png_init_io(writer.png, file.get());
    png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(mask.width),
                 static_cast<png_uint_32>(mask.height), 1, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(writer.png, writer.info);
    png_write_image(writer.png, row_pointers.data());
    png_write_end(writer.png, nullptr);
}

void save_jpeg_rgb8(const std::filesystem::path& path, const RgbImage& image, int quality) {
    FilePtr file = open_file(path, "wb");
    jpeg_compress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;

    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        throw Error("JPEG write failed: " + path.string() + " (" + err.message + ")");
    }

    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, file.get());
    cinfo.image_width = static_cast<JDIMENSION>(image.width);
    cinfo.image_height = static_cast<JDIMENSION>(image.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(
            image.rgb.data() + static_cast<size_t>(cinfo.next_scanline) * image.width * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
}

std::string mask_to_rle(const SegmentationMask& mask) {
    std::string out = "SKYRLE v1\n";
    out += std::to_string(mask.width) + ' ' + std::to_string(mask.height) + '\n';
    const int total = mask.pixel_count();
    bool value = false;  // runs start with sky
    long long run = 0;
    std::string runs;
    for (int i = 0; i < total; ++i) {
        if (mask.cloud(i) == value) {
            ++run;
        } else {
            runs += std::to_string(run) + ' ';
            value = !value;
            run = 1;
        }
    }
    runs += std::to_string(run);
    out += runs + '\n';
    return out;
}

SegmentationMask mask_from_rle(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic, version;
    in >> magic >> version;
    if (magic != "SKYRLE" || version != "v1") throw Error("bad RLE header");
    SegmentationMask mask;
    if (!(in >> mask.width >> mask.height) || mask.width < 1 || mask.height < 1)
        throw Error("bad RLE dimensions");
    mask.labels.resize(static_cast<size_t>(mask.width) * mask.height);
    long long run;
    size_t pos = 0;
    bool value = false;
    while (in >> run) {
        if (run < 0 || pos + static_cast<size_t>(run) > mask.labels.size())
            throw Error("RLE runs exceed mask size");
        std::fill_n(mask.labels.begin() + static_cast<long>(pos), run, value ? 1 : 0);
        pos += static_cast<size_t>(run);
        value = !value;
    }
    if (pos != mask.labels.size()) throw Error("RLE runs do not cover mask");
    return mask;
}

GrayImage gray_raster(std::span<const double> values, int width, int height) {
    if (values.size() != static_cast<size_t>(width) * height)
        throw ShapeMismatch("raster value count does not match dimensions");
    GrayImage image;
    image.width = width;
    image.height = height;
    image.pixels.resize(values.size());
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    for (size_t i = 0; i < values.size(); ++i)
        image.pixels[i] = static_cast<std::uint8_t>((values[i] - lo) * scale + 0.5);
    return image;
}

}  // namespace skycolor::io
