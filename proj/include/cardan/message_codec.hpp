#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cardan/grille.hpp"
#include "cardan/image.hpp"

namespace cardan {

/// Ordered bit sequence; each element is 0 or 1.
class SecretMessage {
 public:
  SecretMessage() = default;
  explicit SecretMessage(std::vector<std::uint8_t> bits);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::uint8_t operator[](std::size_t i) const noexcept { return bits_[i]; }

  /// "01011" -> 5 bits.
  static SecretMessage from_bitstring(std::string_view text);
  std::string to_bitstring() const;

  /// Bytes are unpacked most-significant bit first.
  static SecretMessage from_bytes(std::span<const std::uint8_t> bytes);
  /// Packs MSB first; the last byte is zero-padded.
  Bytes to_bytes() const;

  /// Every hex digit contributes 4 bits, MSB first. `bits` truncates the
  /// result (must not exceed 4 * digits).
  static SecretMessage from_hex(std::string_view hex);
  static SecretMessage from_hex(std::string_view hex, std::size_t bits);
  /// Hex of the zero-padded bit string, one digit per started nibble.
  std::string to_hex() const;

  bool operator==(const SecretMessage&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Corrupted cover with encoded message pixels written at grille positions.
struct ExpandedCarrier {
  Image image;
  PaddedGrille padded;
  int si;
};

struct StegoProvenance {
  std::string grille_fingerprint;
  int si = 7;
  CompletionMode mode = CompletionMode::soft;
  int iterations = 0;
};

struct StegoImage {
  Image image;
  StegoProvenance provenance;
};

/// Writes a (8 - si)-bit chunk (MSB first) into the top bits of a byte and
/// fills the si redundancy bits with the bin midpoint 10...0.
std::uint8_t encode_chunk(std::span<const std::uint8_t> bits, int si);
/// Top (8 - si) bits of the byte, MSB first.
std::vector<std::uint8_t> decode_chunk(std::uint8_t pixel, int si);

/// Integer forms of the same mapping; `chunk` holds 8 - si bits.
std::uint8_t encode_chunk_value(unsigned chunk, int si);
unsigned decode_chunk_value(std::uint8_t pixel, int si) noexcept;

/// One writable (pixel, channel) position.
struct CarrierSlot {
  int row;
  int col;
  int channel;
  bool operator==(const CarrierSlot&) const = default;
};

/// Traversal shared by sender and receiver: grille support in row-major
/// order, then channels 0..C-1 within each pixel. Slot k holds message bits
/// [k * (8 - si), (k + 1) * (8 - si)).
std::vector<CarrierSlot> carrier_slots(const PaddedGrille& padded, int channels);

/// Writes every slot: successive message chunks first, the final partial
/// chunk zero-padded, remaining slots zero chunks. Non-support pixels are
/// copied from the cover. Throws CapacityError when the message does not fit.
ExpandedCarrier expand_message(const SecretMessage& message, const Image& cover,
                               const PaddedGrille& padded, int si);

/// Quantizes support pixels to 8 bits, decodes their chunks in slot order and
/// truncates to `expected_length`. Throws CapacityError when the length
/// exceeds the capacity.
SecretMessage extract_message(const Image& stego, const PaddedGrille& padded, int si,
                              std::size_t expected_length);
SecretMessage extract_message(const StegoImage& stego, const PaddedGrille& padded, int si,
                              std::size_t expected_length);

/// Hamming distance over length; 0 for two empty messages.
double bit_error_rate(const SecretMessage& sent, const SecretMessage& received);

}  // namespace cardan
