#include "cardan/message_codec.hpp"

#include <string>

#include "cardan/error.hpp"

namespace cardan {

namespace {

void check_si(int si) {
  if (si < 0 || si > 7) {
    throw InvalidArgument("stability index must lie in 0..7, got " + std::to_string(si));
  }
}

}  // namespace

SecretMessage::SecretMessage(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (const auto b : bits_) {
    if (b > 1) throw InvalidArgument("message bits must be 0 or 1");
  }
}

SecretMessage SecretMessage::from_bitstring(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (const char ch : text) {
    if (ch != '0' && ch != '1') {
      throw InvalidArgument("bit string may contain only '0' and '1'");
    }
    bits.push_back(ch == '1' ? 1 : 0);
  }
  return SecretMessage(std::move(bits));
}

std::string SecretMessage::to_bitstring() const {
  std::string out;
  out.reserve(bits_.size());
  for (const auto b : bits_) out.push_back(b ? '1' : '0');
  return out;
}

SecretMessage SecretMessage::from_bytes(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> bits;
  bits.reserve(bytes.size() * 8);
  for (const auto byte : bytes) {
    for (int i = 7; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((byte >> i) & 1));
  }
  return SecretMessage(std::move(bits));
}

Bytes SecretMessage::to_bytes() const {
  Bytes out((bits_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
  }
  return out;
}

SecretMessage SecretMessage::from_hex(std::string_view hex) { return from_hex(hex, hex.size() * 4); }

SecretMessage SecretMessage::from_hex(std::string_view hex, std::size_t bits) {
  if (bits > hex.size() * 4) {
    throw InvalidArgument("requested " + std::to_string(bits) + " bits from " +
                          std::to_string(hex.size()) + " hex digits");
  }
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() * 4);
  for (const char ch : hex) {
    int v = -1;
    if (ch >= '0' && ch <= '9') v = ch - '0';
    if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
    if (v < 0) throw InvalidArgument("invalid hex digit '" + std::string(1, ch) + "'");
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> i) & 1));
  }
  out.resize(bits);
  return SecretMessage(std::move(out));
}

std::string SecretMessage::to_hex() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits_.size(); i += 4) {
    int v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      v = (v << 1) | (i + j < bits_.size() ? bits_[i + j] : 0);
    }
    out.push_back(kHex[v]);
  }
  return out;
}

std::uint8_t encode_chunk_value(unsigned chunk, int si) {
  check_si(si);
  const int width = 8 - si;
  if (chunk >= (1u << width)) {
    throw InvalidArgument("chunk value does not fit in " + std::to_string(width) + " bits");
  }
  const unsigned redundancy = si == 0 ? 0u : (1u << (si - 1));
  return static_cast<std::uint8_t>((chunk << si) | redundancy);
}

unsigned decode_chunk_value(std::uint8_t pixel, int si) noexcept {
  return static_cast<unsigned>(pixel) >> si;
}

std::uint8_t encode_chunk(std::span<const std::uint8_t> bits, int si) {
  check_si(si);
  const auto width = static_cast<std::size_t>(8 - si);
  if (bits.size() != width) {
    throw InvalidArgument("chunk has " + std::to_string(bits.size()) + " bits, expected " +
                          std::to_string(width) + " for si=" + std::to_string(si));
  }
  unsigned chunk = 0;
  for (const auto b : bits) {
    if (b > 1) throw InvalidArgument("chunk bits must be 0 or 1");
    chunk = (chunk << 1) | b;
  }
  return encode_chunk_value(chunk, si);
}

std::vector<std::uint8_t> decode_chunk(std::uint8_t pixel, int si) {
  check_si(si);
  const int width = 8 - si;
  const unsigned chunk = decode_chunk_value(pixel, si);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i) {
    bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((chunk >> (width - 1 - i)) & 1u);
  }
  return bits;
}

std::vector<CarrierSlot> carrier_slots(const PaddedGrille& padded, int channels) {
  std::vector<CarrierSlot> slots;
  slots.reserve(padded.popcount() * static_cast<std::size_t>(channels));
  for (const auto& [r, c] : padded.support()) {
    for (int ch = 0; ch < channels; ++ch) slots.push_back(CarrierSlot{r, c, ch});
  }
  return slots;
}

ExpandedCarrier expand_message(const SecretMessage& message, const Image& cover,
                               const PaddedGrille& padded, int si) {
  check_si(si);
  if (cover.height() != padded.height() || cover.width() != padded.width()) {
    throw ShapeError("cover and padded grille differ in shape");
  }
  const std::size_t available = capacity(padded, cover.channels(), si);
  if (message.size() > available) {
    throw CapacityError(message.size(), available);
  }
  const auto width = static_cast<std::size_t>(8 - si);
  Image carrier = cover;
  std::size_t next_bit = 0;
  for (const auto& slot : carrier_slots(padded, cover.channels())) {
    unsigned chunk = 0;
    for (std::size_t j = 0; j < width; ++j) {
      const std::uint8_t bit = next_bit < message.size() ? message[next_bit] : 0;
      chunk = (chunk << 1) | bit;
      ++next_bit;
    }
    carrier.at(slot.row, slot.col, slot.channel) = dequantize(encode_chunk_value(chunk, si));
  }
  return ExpandedCarrier{std::move(carrier), padded, si};
}

SecretMessage extract_message(const Image& stego, const PaddedGrille& padded, int si,
                              std::size_t expected_length) {
  check_si(si);
  if (stego.height() != padded.height() || stego.width() != padded.width()) {
    throw ShapeError("stego image and padded grille differ in shape");
  }
  const std::size_t available = capacity(padded, stego.channels(), si);
  if (expected_length > available) {
    throw CapacityError(expected_length, available);
  }
  const int width = 8 - si;
  std::vector<std::uint8_t> bits;
  bits.reserve(expected_length);
  for (const auto& slot : carrier_slots(padded, stego.channels())) {
    if (bits.size() >= expected_length) break;
    const unsigned chunk = decode_chunk_value(quantize(stego.at(slot.row, slot.col, slot.channel)), si);
    for (int j = width - 1; j >= 0 && bits.size() < expected_length; --j) {
      bits.push_back(static_cast<std::uint8_t>((chunk >> j) & 1u));
    }
  }
  return SecretMessage(std::move(bits));
}

SecretMessage extract_message(const StegoImage& stego, const PaddedGrille& padded, int si,
                              std::size_t expected_length) {
  return extract_message(stego.image, padded, si, expected_length);
}

double bit_error_rate(const SecretMessage& sent, const SecretMessage& received) {
  if (sent.size() != received.size()) {
    throw InvalidArgument("bit error rate needs equal lengths, got " + std::to_string(sent.size()) +
                          " and " + std::to_string(received.size()));
  }
  if (sent.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) errors += sent[i] != received[i];
  return static_cast<double>(errors) / static_cast<double>(sent.size());
}

}  // namespace cardan
