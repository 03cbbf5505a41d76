#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gazemap {

struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Resolution {
  int width = 0;
  int height = 0;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

// Inclusive pixel bounds of the 1-pixels of a mask.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool contains(Pixel p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Dense binary image, row-major storage.
class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(int height, int width) : height_(height), width_(width), bits_(std::size_t(height) * width) {}

  int height() const { return height_; }
  int width() const { return width_; }
  bool at(int x, int y) const { return bits_[std::size_t(y) * width_ + x] != 0; }
  void set(int x, int y, bool on = true) { bits_[std::size_t(y) * width_ + x] = on ? 1 : 0; }
  std::size_t area() const;

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Uncompressed COCO-style RLE: column-major, alternating runs starting with
// a (possibly empty) run of zeros.
class RleMask {
 public:
  RleMask() = default;
  RleMask(int height, int width, std::vector<std::uint32_t> counts);

  int height() const { return height_; }
  int width() const { return width_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }

  // sum(counts) == height * width
  bool size_consistent() const { return total_ == std::uint64_t(height_) * std::uint64_t(width_); }
  // No empty runs except the leading zero-run.
  bool canonical() const;
  std::uint64_t area() const { return area_; }
  std::optional<BBox> bbox() const;

  // Requires size_consistent() and (x, y) inside the mask.
  bool contains(int x, int y) const;

  friend bool operator==(const RleMask& a, const RleMask& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.counts_ == b.counts_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint64_t> run_ends_;  // exclusive end offset of each run
  std::uint64_t total_ = 0;
  std::uint64_t area_ = 0;
};

// Throws FormatError if the counts do not cover height*width pixels.
Bitmap decode_rle(const RleMask& mask);
RleMask encode_rle(const Bitmap& bitmap);

struct Instance {
  std::string id;
  std::string label;
  double score = 0.0;
  RleMask mask;
  BBox bbox;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// Instance with bbox computed from the mask. Throws ContractError on an
// empty mask.
Instance make_instance(std::string id, std::string label, double score, RleMask mask);

struct FrameMasks {
  std::int64_t frame_index = 0;
  std::vector<Instance> instances;

  friend bool operator==(const FrameMasks&, const FrameMasks&) = default;
};

struct MaskSet {
  Resolution resolution;
  std::map<std::string, std::string> class_table;
  std::map<std::int64_t, FrameMasks> frames;

  // Absent frames mean "no detections".
  const FrameMasks* frame(std::int64_t index) const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;
};

enum class TieBreak {
  score_area_id,  // highest score, then smaller area, then instance id
  area_score_id,  // smaller area, then highest score, then instance id
};

std::string_view to_string(TieBreak policy);
std::optional<TieBreak> parse_tie_break(std::string_view text);

inline constexpr double kDefaultScoreThreshold = 0.7;

// Mask membership; the bbox only short-circuits misses. Throws ContractError
// if p lies outside the mask.
bool point_in_instance(Pixel p, const Instance& inst);

// Winner among instances with score >= threshold whose mask contains p.
const Instance* hit_instance(Pixel p, std::span<const Instance> instances, double score_threshold,
                             TieBreak policy = TieBreak::score_area_id);
std::optional<std::string> hit_test(Pixel p, const FrameMasks& frame, double score_threshold,
                                    TieBreak policy = TieBreak::score_area_id);

// Square structuring element of side 2*radius+1, clipped at the image border.
Instance dilate_instance(const Instance& inst, int radius);
MaskSet dilate_maskset(const MaskSet& set, int radius);

struct MaskViolation {
  std::optional<std::int64_t> frame;
  std::optional<std::size_t> instance;
  std::string message;

  std::string describe() const;
};

struct MaskValidationReport {
  std::vector<MaskViolation> violations;
  std::size_t frame_count = 0;
  std::size_t instance_count = 0;

  bool ok() const { return violations.empty(); }
};

MaskValidationReport validate_maskset(const MaskSet& set);

// Structural parse of a mask exchange document; throws FormatError with the
// frame/instance location when keys or types are wrong. Invariants are not
// checked here (see validate_maskset).
MaskSet parse_maskset(const nlohmann::json& doc);
// parse + validate; throws FormatError naming the first violations.
MaskSet load_maskset(const std::string& path);
MaskSet load_maskset_document(const std::string& text);

nlohmann::ordered_json maskset_to_json(const MaskSet& set);
std::string serialize_maskset(const MaskSet& set);
void save_maskset(const MaskSet& set, const std::string& path);

}  // namespace gazemap
