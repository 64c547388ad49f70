#include <doctest.h>

#include <cmath>

#include "cardan/error.hpp"
#include "cardan/message_codec.hpp"
#include "support.hpp"

using namespace cardan;
using testing::random_image;
using testing::random_message;
using testing::random_padded;

namespace {

std::vector<std::uint8_t> bits_of(std::string_view s) {
  std::vector<std::uint8_t> out;
  for (char ch : s) out.push_back(ch == '1');
  return out;
}

}  // namespace

TEST_CASE("quantization mapping") {
  CHECK(quantize(-1.0) == 0);
  CHECK(quantize(1.0) == 255);
  CHECK(quantize(0.0) == 128);  // 127.5 rounds away from zero
  CHECK(quantize(-2.0) == 0);
  CHECK(quantize(3.0) == 255);
  CHECK(quantize(-1e-9) == 127);
  for (int v = 0; v < 256; ++v) {
    CHECK(quantize(dequantize(static_cast<std::uint8_t>(v))) == v);
    CHECK(dequantize(static_cast<std::uint8_t>(v)) == doctest::Approx(v / 127.5 - 1.0));
  }
}

TEST_CASE("chunk examples") {
  CHECK(encode_chunk(bits_of("101"), 5) == 176);
  CHECK(encode_chunk(bits_of("0"), 7) == 64);
  CHECK(encode_chunk(bits_of("1"), 7) == 192);
  CHECK(encode_chunk(bits_of("00000000"), 0) == 0);
  CHECK(encode_chunk(bits_of("10100101"), 0) == 0xa5);
  CHECK(decode_chunk(176, 5) == bits_of("101"));
  CHECK(decode_chunk(255, 7) == bits_of("1"));
  CHECK(decode_chunk(0, 7) == bits_of("0"));
  CHECK_THROWS_AS(encode_chunk(bits_of("10"), 5), InvalidArgument);
  CHECK_THROWS_AS(encode_chunk(bits_of("1"), 8), InvalidArgument);
}

TEST_CASE("chunk codec is exact for every chunk of every si") {
  int cases = 0;
  for (int si = 0; si <= 7; ++si) {
    const int width = 8 - si;
    for (unsigned chunk = 0; chunk < (1u << width); ++chunk) {
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(width));
      for (int k = 0; k < width; ++k) bits[static_cast<std::size_t>(k)] = (chunk >> (width - 1 - k)) & 1u;
      const auto byte = encode_chunk(bits, si);
      REQUIRE(decode_chunk(byte, si) == bits);
      REQUIRE(encode_chunk_value(chunk, si) == byte);
      REQUIRE(decode_chunk_value(byte, si) == chunk);
      // Redundancy bits hold the midpoint pattern.
      const unsigned low = byte & ((1u << si) - 1u);
      REQUIRE(low == (si == 0 ? 0u : 1u << (si - 1)));
      ++cases;
    }
  }
  CHECK(cases == 510);  // 2^8 + 2^7 + ... + 2^1
}

TEST_CASE("decode survives perturbations inside the rounding margin") {
  Rng rng(8);
  for (int si = 1; si <= 7; ++si) {
    const double margin = (std::ldexp(1.0, si - 1) - 0.5) / 127.5;
    for (unsigned chunk = 0; chunk < (1u << (8 - si)); ++chunk) {
      const double v = dequantize(encode_chunk_value(chunk, si));
      for (int trial = 0; trial < 20; ++trial) {
        const double delta = rng.uniform(-1.0, 1.0) * margin * 0.999;
        REQUIRE(decode_chunk_value(quantize(v + delta), si) == chunk);
      }
      // Just past the upper edge the value lands in the next bin, unless
      // it is clamped at 255.
      if (chunk + 1 < (1u << (8 - si))) {
        REQUIRE(decode_chunk_value(quantize(v + margin + 1e-9), si) == chunk + 1);
      }
    }
  }
}

TEST_CASE("worked example: 01011 on the checkerboard grille") {
  const auto padded = zero_pad(load_grille(BinaryMask::from_rows({"101", "010", "101"})), 3, 3);
  const Image cover(ImageShape{3, 3, 1}, 0.25);
  const auto m = SecretMessage::from_bitstring("01011");
  const auto carrier = expand_message(m, cover, padded, 7);
  const int expected[3][3] = {{64, -1, 192}, {-1, 64, -1}, {192, -1, 192}};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (expected[r][c] < 0) {
        CHECK(carrier.image.at(r, c, 0) == 0.25);
      } else {
        CHECK(quantize(carrier.image.at(r, c, 0)) == expected[r][c]);
      }
    }
  }
  CHECK(extract_message(carrier.image, padded, 7, 5) == m);
  CHECK(capacity(padded, 1, 7) == 5);
}

TEST_CASE("traversal is row-major then channel") {
  const auto padded = zero_pad(load_grille(BinaryMask::from_rows({"011", "100"})), 4, 5, Offset{1, 1});
  const auto slots = carrier_slots(padded, 2);
  const std::vector<CarrierSlot> expected{{1, 2, 0}, {1, 2, 1}, {1, 3, 0}, {1, 3, 1}, {2, 1, 0}, {2, 1, 1}};
  CHECK(slots == expected);
}

TEST_CASE("padding chunks and empty messages") {
  Rng rng(1);
  const auto padded = zero_pad(derive_grille(Bytes{4}, 4, 4, 1.0), 8, 8);
  const Image cover = random_image(rng, ImageShape{8, 8, 3});

  const auto empty = expand_message(SecretMessage{}, cover, padded, 5);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        if (padded.on_support(r, c)) {
          CHECK(quantize(empty.image.at(r, c, ch)) == encode_chunk_value(0, 5));
        } else {
          CHECK(empty.image.at(r, c, ch) == cover.at(r, c, ch));
        }
      }
    }
  }
  CHECK(extract_message(empty.image, padded, 5, 0).empty());

  // Two bits at si=5 leave the last bit of the first chunk as padding.
  const auto two = expand_message(SecretMessage::from_bitstring("11"), cover, padded, 5);
  CHECK(quantize(two.image.at(2, 2, 0)) == encode_chunk_value(0b110, 5));
  CHECK(quantize(two.image.at(2, 2, 1)) == encode_chunk_value(0, 5));

  const auto none = zero_pad(load_grille(BinaryMask(4, 4)), 8, 8);
  CHECK(extract_message(cover, none, 7, 0).empty());
}

TEST_CASE("capacity violations report both numbers") {
  const auto padded = zero_pad(load_grille(BinaryMask::from_rows({"11"})), 2, 2);
  const Image cover(ImageShape{2, 2, 1});
  try {
    expand_message(SecretMessage::from_bitstring("111"), cover, padded, 7);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(e.requested() == 3);
    CHECK(e.available() == 2);
  }
  CHECK_THROWS_AS(extract_message(cover, padded, 7, 3), CapacityError);
  CHECK_THROWS_AS(expand_message(SecretMessage{}, Image(ImageShape{3, 3, 1}), padded, 7), ShapeError);
}

TEST_CASE("expand then extract is the identity for random inputs") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const int h = 4 + static_cast<int>(rng.below(13));
    const int w = 4 + static_cast<int>(rng.below(13));
    const int ch = rng.bit() ? 3 : 1;
    const int si = static_cast<int>(rng.below(8));
    const auto padded = random_padded(rng, h, w, 0.05 + 0.95 * rng.uniform());
    const auto cap = capacity(padded, ch, si);
    const auto m = random_message(rng, cap == 0 ? 0 : rng.below(cap + 1));
    const Image cover = random_image(rng, ImageShape{h, w, ch});
    const auto carrier = expand_message(m, cover, padded, si);
    REQUIRE(extract_message(carrier.image, padded, si, m.size()) == m);
    REQUIRE(carrier.si == si);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (!padded.on_support(r, c))
          for (int k = 0; k < ch; ++k) REQUIRE(carrier.image.at(r, c, k) == cover.at(r, c, k));
  }
}

TEST_CASE("extraction ignores every non-support pixel") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const int si = static_cast<int>(rng.below(8));
    const auto padded = random_padded(rng, 12, 12);
    const auto m = random_message(rng, capacity(padded, 3, si));
    auto image = expand_message(m, random_image(rng, ImageShape{12, 12, 3}), padded, si).image;
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c)
        if (!padded.on_support(r, c))
          for (int k = 0; k < 3; ++k) image.at(r, c, k) = rng.uniform(-1.0, 1.0);
    REQUIRE(extract_message(image, padded, si, m.size()) == m);
  }
}

TEST_CASE("bit error rate") {
  const auto a = SecretMessage::from_bitstring("0101");
  CHECK(bit_error_rate(a, a) == 0.0);
  CHECK(bit_error_rate(a, SecretMessage::from_bitstring("1010")) == 1.0);
  CHECK(bit_error_rate(a, SecretMessage::from_bitstring("0111")) == 0.25);
  CHECK(bit_error_rate(SecretMessage{}, SecretMessage{}) == 0.0);
  CHECK_THROWS_AS(bit_error_rate(a, SecretMessage::from_bitstring("01")), InvalidArgument);
}

TEST_CASE("message conversions") {
  const auto m = SecretMessage::from_hex("a5");
  CHECK(m.to_bitstring() == "10100101");
  CHECK(SecretMessage::from_hex("a5", 3).to_bitstring() == "101");
  CHECK(SecretMessage::from_bitstring("101").to_hex() == "a");
  CHECK(SecretMessage::from_bitstring("10100").to_bytes() == Bytes{0xa0});
  const Bytes raw{0xde, 0xad};
  CHECK(SecretMessage::from_bytes(raw).to_bytes() == raw);
  CHECK(SecretMessage::from_bytes(raw).to_hex() == "dead");
  CHECK_THROWS_AS(SecretMessage::from_bitstring("012"), InvalidArgument);
  CHECK_THROWS_AS(SecretMessage::from_hex("a5", 9), InvalidArgument);
  CHECK_THROWS_AS(SecretMessage(std::vector<std::uint8_t>{0, 2}), InvalidArgument);
}
