#include <gtest/gtest.h>

#include <png.h>

#include "support.hpp"

using namespace actmap;
using testing_support::TempDir;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Validation;
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

void write_png16(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, 2, 2, 16, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(2 * 3 * 2, 0x80);
  for (int y = 0; y < 2; ++y) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

/// Minimal bottom-up 24-bit BMP.
void write_bmp24(const std::filesystem::path& path, int w, int h, const std::vector<std::uint8_t>& rgb) {
  const int stride = (w * 3 + 3) / 4 * 4;
  const std::uint32_t data_size = static_cast<std::uint32_t>(stride * h);
  std::vector<std::uint8_t> b(54 + data_size, 0);
  auto put32 = [&](std::size_t at, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) b[at + k] = static_cast<std::uint8_t>(v >> (8 * k));
  };
  b[0] = 'B';
  b[1] = 'M';
  put32(2, static_cast<std::uint32_t>(b.size()));
  put32(10, 54);
  put32(14, 40);
  put32(18, static_cast<std::uint32_t>(w));
  put32(22, static_cast<std::uint32_t>(h));
  b[26] = 1;
  b[28] = 24;
  put32(34, data_size);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t src = static_cast<std::size_t>((y * w + x) * 3);
      const std::size_t dst = 54 + static_cast<std::size_t>((h - 1 - y) * stride + x * 3);
      b[dst] = rgb[src + 2];
      b[dst + 1] = rgb[src + 1];
      b[dst + 2] = rgb[src];
    }
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

const std::string kHeader = std::string(kManifestHeader) + "\n";

}  // namespace

TEST(Manifest, MinimalOneRow) {
  TempDir dir("manifest1");
  write_png(dir / "r.png", 2, 2, std::vector<std::uint8_t>(12, 10));
  write_png(dir / "d.png", 2, 2, std::vector<std::uint8_t>(12, 20));
  write_file(dir / "m.csv", kHeader + "p1,r1,r.png,d.png,3.5,blur,2\n");
  const auto m = load_manifest(dir / "m.csv");
  ASSERT_EQ(m.rows.size(), 1u);
  EXPECT_EQ(m.reference_ids(), std::vector<std::string>{"r1"});
  EXPECT_EQ(m.rows[0].distortion_level, 2);
  EXPECT_EQ(m.resolve(m.rows[0].distorted_path), dir / "d.png");
}

TEST(Manifest, Errors) {
  TempDir dir("manifest2");
  write_png(dir / "r.png", 2, 2, std::vector<std::uint8_t>(12, 10));
  write_file(dir / "m.csv", kHeader + "p1,r1,r.png,missing.png,3.5,blur,2\n");
  try {
    load_manifest(dir / "m.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingImageFile);
    EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
  }
  write_file(dir / "m.csv", kHeader + "p1,r1,r.png,r.png,3.5,blur,2\np1,r1,r.png,r.png,3.0,blur,3\n");
  EXPECT_EQ(kind_of([&] { load_manifest(dir / "m.csv"); }), ErrorKind::DuplicatePairId);
  write_file(dir / "m.csv", "pair_id,reference_id,reference_path,distorted_path,distortion_type,distortion_level\n");
  EXPECT_EQ(kind_of([&] { load_manifest(dir / "m.csv"); }), ErrorKind::MissingColumn);
}

TEST(Manifest, RoundTripIsLossless) {
  TempDir dir("manifest3");
  DatasetManifest m;
  m.base_dir = dir.path();
  m.rows.push_back({"a", "r1", "x/r1.png", "x/a.png", 0.123456789, "blur", 1});
  m.rows.push_back({"b,\"q\"", "r2", "x/r2.png", "x/b.png", 4.5, "", std::nullopt});
  write_manifest(m, dir / "m.csv");
  const auto once = load_manifest(dir / "m.csv", false);
  write_manifest(once, dir / "m2.csv");
  EXPECT_EQ(testing_support::slurp(dir / "m.csv"), testing_support::slurp(dir / "m2.csv"));
  ASSERT_EQ(once.rows.size(), 2u);
  EXPECT_EQ(once.rows[1].pair_id, "b,\"q\"");
  EXPECT_EQ(once.rows[0].mos, 0.123456789);
  EXPECT_FALSE(once.rows[1].distortion_level);
}

TEST(Manifest, KadidShapedPartition) {
  TempDir dir("kadid_shape");
  std::ostringstream csv;
  csv << "dist_img,ref_img,dmos,var\n";
  for (int r = 1; r <= 81; ++r)
    for (int t = 1; t <= 25; ++t)
      for (int l = 1; l <= 5; ++l) {
        char name[32], ref[32];
        std::snprintf(name, sizeof name, "I%02d_%02d_%02d.png", r, t, l);
        std::snprintf(ref, sizeof ref, "I%02d.png", r);
        csv << name << ',' << ref << ',' << 5.0 - 0.7 * l + 0.01 * t << ",0.1\n";
      }
  write_file(dir / "dmos.csv", csv.str());
  const auto m = cmd::convert_kadid(dir / "dmos.csv", false);
  EXPECT_EQ(m.rows.size(), 10125u);
  EXPECT_EQ(m.reference_ids().size(), 81u);
  std::size_t total = 0;
  for (const auto& [id, idx] : m.by_reference()) {
    EXPECT_EQ(idx.size(), 125u);
    total += idx.size();
  }
  EXPECT_EQ(total, m.rows.size());
  EXPECT_EQ(m.rows[0].reference_id, "I01");
  EXPECT_EQ(m.rows[0].distortion_type, "01");
  EXPECT_EQ(m.rows[0].distortion_level, 1);
}

TEST(DecodeImage, PureRedPng) {
  TempDir dir("png_red");
  std::vector<std::uint8_t> px;
  for (int i = 0; i < 4; ++i) px.insert(px.end(), {255, 0, 0});
  write_png(dir / "red.png", 2, 2, px);
  const Tensor t = decode_image(dir / "red.png");
  ASSERT_EQ(t.depth(), 3u);
  EXPECT_EQ(t.width(), 2u);
  for (float v : t.channel(0)) EXPECT_EQ(v, 1.0f);
  for (float v : t.channel(1)) EXPECT_EQ(v, 0.0f);
  for (float v : t.channel(2)) EXPECT_EQ(v, 0.0f);
}

TEST(DecodeImage, GrayscalePromotedToRgb) {
  TempDir dir("png_gray");
  write_png(dir / "g.png", 3, 2, std::vector<std::uint8_t>{0, 51, 102, 153, 204, 255}, 1);
  const Tensor t = decode_image(dir / "g.png");
  ASSERT_EQ(t.depth(), 3u);
  EXPECT_TRUE(std::ranges::equal(t.channel(0), t.channel(1)));
  EXPECT_TRUE(std::ranges::equal(t.channel(0), t.channel(2)));
  EXPECT_FLOAT_EQ(t(1, 0, 0), 51.0f / 255.0f);
  EXPECT_FLOAT_EQ(t(2, 1, 2), 1.0f);
}

TEST(DecodeImage, SixteenBitUnsupported) {
  TempDir dir("png16");
  write_png16(dir / "deep.png");
  EXPECT_EQ(kind_of([&] { decode_image(dir / "deep.png"); }), ErrorKind::UnsupportedFormat);
}

TEST(DecodeImage, BmpMatchesPng) {
  TempDir dir("bmp");
  std::vector<std::uint8_t> px(5 * 3 * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 17 % 256);
  write_bmp24(dir / "a.bmp", 5, 3, px);
  write_png(dir / "a.png", 5, 3, px);
  EXPECT_EQ(decode_image(dir / "a.bmp"), decode_image(dir / "a.png"));
}

TEST(DecodeImage, CorruptAndUnknown) {
  TempDir dir("corrupt");
  write_png(dir / "ok.png", 4, 4, std::vector<std::uint8_t>(48, 7));
  std::string bytes = testing_support::slurp(dir / "ok.png");
  write_file(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
  EXPECT_EQ(kind_of([&] { decode_image(dir / "cut.png"); }), ErrorKind::CorruptFile);
  write_file(dir / "x.gif", "GIF89a....");
  EXPECT_EQ(kind_of([&] { decode_image(dir / "x.gif"); }), ErrorKind::UnsupportedFormat);
}

TEST(NormalizeMos, MinMax) {
  DatasetManifest a, b;
  for (double m : {1.0, 2.0, 5.0, 3.0}) a.rows.push_back({"p" + std::to_string(m), "r", "", "", m, "", {}});
  for (double m : {10.0, 40.0, 20.0}) b.rows.push_back({"q" + std::to_string(m), "s", "", "", m, "", {}});
  const auto na = normalize_mos(a, MosNormalization::MinMaxPerDb);
  EXPECT_EQ(na.rows[0].mos, 0.0);
  EXPECT_EQ(na.rows[1].mos, 0.25);
  EXPECT_EQ(na.rows[2].mos, 1.0);
  const auto same = normalize_mos(a, MosNormalization::None);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(same.rows[i].mos, a.rows[i].mos);

  auto joined = na.rows;
  const auto nb = normalize_mos(b, MosNormalization::MinMaxPerDb);
  joined.insert(joined.end(), nb.rows.begin(), nb.rows.end());
  for (const auto* part : {&na, &nb}) {
    const auto [lo, hi] = std::minmax_element(part->rows.begin(), part->rows.end(),
                                              [](const auto& x, const auto& y) { return x.mos < y.mos; });
    EXPECT_EQ(lo->mos, 0.0);
    EXPECT_EQ(hi->mos, 1.0);
  }
  EXPECT_EQ(joined.size(), 7u);

  DatasetManifest flat;
  flat.rows.push_back({"x", "r", "", "", 2.0, "", {}});
  flat.rows.push_back({"y", "r", "", "", 2.0, "", {}});
  EXPECT_EQ(kind_of([&] { normalize_mos(flat, MosNormalization::MinMaxPerDb); }), ErrorKind::DegenerateInput);
}
