#include "gazemap/mask_store.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "gazemap/error.hpp"

namespace gazemap {

using nlohmann::json;

std::size_t Bitmap::area() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RleMask::RleMask(int height, int width, std::vector<std::uint32_t> counts)
    : height_(height), width_(width), counts_(std::move(counts)) {
  run_ends_.reserve(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    total_ += counts_[i];
    if (i % 2 == 1) area_ += counts_[i];
    run_ends_.push_back(total_);
  }
}

bool RleMask::canonical() const {
  for (std::size_t i = 1; i < counts_.size(); ++i) {
    if (counts_[i] == 0) return false;
  }
  return true;
}

std::optional<BBox> RleMask::bbox() const {
  if (height_ <= 0) return std::nullopt;
  const auto h = static_cast<std::uint64_t>(height_);
  std::optional<BBox> box;
  for (std::size_t r = 1; r < counts_.size(); r += 2) {
    if (counts_[r] == 0) continue;
    const std::uint64_t end = run_ends_[r];
    const std::uint64_t start = end - counts_[r];
    const int c0 = static_cast<int>(start / h);
    const int c1 = static_cast<int>((end - 1) / h);
    int y0 = 0;
    int y1 = height_ - 1;
    if (c0 == c1) {
      y0 = static_cast<int>(start % h);
      y1 = static_cast<int>((end - 1) % h);
    }
    if (!box) {
      box = BBox{c0, y0, c1, y1};
    } else {
      box->x0 = std::min(box->x0, c0);
      box->x1 = std::max(box->x1, c1);
      box->y0 = std::min(box->y0, y0);
      box->y1 = std::max(box->y1, y1);
    }
  }
  return box;
}

bool RleMask::contains(int x, int y) const {
  const std::uint64_t idx = std::uint64_t(x) * std::uint64_t(height_) + std::uint64_t(y);
  const auto it = std::upper_bound(run_ends_.begin(), run_ends_.end(), idx);
  if (it == run_ends_.end()) return false;
  return (it - run_ends_.begin()) % 2 == 1;
}

Bitmap decode_rle(const RleMask& mask) {
  if (!mask.size_consistent()) {
    const auto sum = std::accumulate(mask.counts().begin(), mask.counts().end(), std::uint64_t{0});
    throw FormatError("RLE counts sum " + std::to_string(sum) + " != " +
                      std::to_string(mask.height()) + "x" + std::to_string(mask.width()));
  }
  Bitmap bitmap(mask.height(), mask.width());
  const auto h = static_cast<std::uint64_t>(mask.height());
  std::uint64_t pos = 0;
  bool on = false;
  for (std::uint32_t run : mask.counts()) {
    if (on) {
      for (std::uint64_t i = pos; i < pos + run; ++i) {
        bitmap.set(static_cast<int>(i / h), static_cast<int>(i % h));
      }
    }
    pos += run;
    on = !on;
  }
  return bitmap;
}

RleMask encode_rle(const Bitmap& bitmap) {
  std::vector<std::uint32_t> counts;
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < bitmap.width(); ++x) {
    for (int y = 0; y < bitmap.height(); ++y) {
      if (bitmap.at(x, y) != current) {
        counts.push_back(run);
        run = 0;
        current = !current;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return RleMask(bitmap.height(), bitmap.width(), std::move(counts));
}

Instance make_instance(std::string id, std::string label, double score, RleMask mask) {
  const auto box = mask.bbox();
  if (!box) throw ContractError("instance '" + id + "' has an empty mask");
  return Instance{std::move(id), std::move(label), score, std::move(mask), *box};
}

const FrameMasks* MaskSet::frame(std::int64_t index) const {
  const auto it = frames.find(index);
  return it == frames.end() ? nullptr : &it->second;
}

std::string_view to_string(TieBreak policy) {
  return policy == TieBreak::area_score_id ? "area_score_id" : "score_area_id";
}

std::optional<TieBreak> parse_tie_break(std::string_view text) {
  if (text == "score_area_id") return TieBreak::score_area_id;
  if (text == "area_score_id") return TieBreak::area_score_id;
  return std::nullopt;
}

bool point_in_instance(Pixel p, const Instance& inst) {
  const auto& m = inst.mask;
  if (p.x < 0 || p.y < 0 || p.x >= m.width() || p.y >= m.height()) {
    throw ContractError("pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                        ") outside " + std::to_string(m.width()) + "x" +
                        std::to_string(m.height()) + " mask of instance '" + inst.id + "'");
  }
  if (!inst.bbox.contains(p)) return false;
  return m.contains(p.x, p.y);
}

namespace {

// True if `a` beats `b`.
bool better(const Instance& a, const Instance& b, TieBreak policy) {
  if (policy == TieBreak::score_area_id) {
    if (a.score != b.score) return a.score > b.score;
    if (a.mask.area() != b.mask.area()) return a.mask.area() < b.mask.area();
  } else {
    if (a.mask.area() != b.mask.area()) return a.mask.area() < b.mask.area();
    if (a.score != b.score) return a.score > b.score;
  }
  return a.id < b.id;
}

}  // namespace

const Instance* hit_instance(Pixel p, std::span<const Instance> instances, double score_threshold,
                             TieBreak policy) {
  const Instance* winner = nullptr;
  for (const auto& inst : instances) {
    if (inst.score < score_threshold) continue;
    if (!point_in_instance(p, inst)) continue;
    if (!winner || better(inst, *winner, policy)) winner = &inst;
  }
  return winner;
}

std::optional<std::string> hit_test(Pixel p, const FrameMasks& frame, double score_threshold,
                                    TieBreak policy) {
  if (const auto* inst = hit_instance(p, frame.instances, score_threshold, policy)) {
    return inst->label;
  }
  return std::nullopt;
}

namespace {

// One-dimensional max filter of half-width `radius` along rows or columns.
Bitmap dilate_axis(const Bitmap& in, int radius, bool along_x) {
  Bitmap out(in.height(), in.width());
  const int outer = along_x ? in.height() : in.width();
  const int inner = along_x ? in.width() : in.height();
  std::vector<int> prefix(std::size_t(inner) + 1);
  for (int o = 0; o < outer; ++o) {
    for (int i = 0; i < inner; ++i) {
      const bool v = along_x ? in.at(i, o) : in.at(o, i);
      prefix[std::size_t(i) + 1] = prefix[std::size_t(i)] + (v ? 1 : 0);
    }
    for (int i = 0; i < inner; ++i) {
      const int lo = std::max(0, i - radius);
      const int hi = std::min(inner - 1, i + radius);
      if (prefix[std::size_t(hi) + 1] - prefix[std::size_t(lo)] > 0) {
        if (along_x) {
          out.set(i, o);
        } else {
          out.set(o, i);
        }
      }
    }
  }
  return out;
}

}  // namespace

Instance dilate_instance(const Instance& inst, int radius) {
  if (radius < 0) throw ContractError("dilation radius must be >= 0");
  if (radius == 0) return inst;
  const Bitmap grown = dilate_axis(dilate_axis(decode_rle(inst.mask), radius, true), radius, false);
  return make_instance(inst.id, inst.label, inst.score, encode_rle(grown));
}

MaskSet dilate_maskset(const MaskSet& set, int radius) {
  if (radius == 0) return set;
  MaskSet out = set;
  for (auto& [index, frame] : out.frames) {
    for (auto& inst : frame.instances) inst = dilate_instance(inst, radius);
  }
  return out;
}

std::string MaskViolation::describe() const {
  std::string where;
  if (frame) where += "frame " + std::to_string(*frame);
  if (instance) where += (where.empty() ? "" : ", ") + std::string("instance ") + std::to_string(*instance);
  return where.empty() ? message : where + ": " + message;
}

MaskValidationReport validate_maskset(const MaskSet& set) {
  MaskValidationReport report;
  auto add = [&](std::optional<std::int64_t> f, std::optional<std::size_t> i, std::string msg) {
    report.violations.push_back({f, i, std::move(msg)});
  };
  const Resolution res = set.resolution;
  if (res.width <= 0 || res.height <= 0) add(std::nullopt, std::nullopt, "resolution must be positive");

  for (const auto& [index, frame] : set.frames) {
    ++report.frame_count;
    if (index < 0) add(index, std::nullopt, "negative frame index");
    if (frame.frame_index != index) add(index, std::nullopt, "frame index does not match its key");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < frame.instances.size(); ++i) {
      ++report.instance_count;
      const Instance& inst = frame.instances[i];
      if (!ids.insert(inst.id).second) add(index, i, "duplicate instance id '" + inst.id + "'");
      if (inst.label.empty()) add(index, i, "empty label");
      if (!set.class_table.empty() && !set.class_table.contains(inst.label)) {
        add(index, i, "label '" + inst.label + "' not in class table");
      }
      if (!(inst.score >= 0.0 && inst.score <= 1.0)) add(index, i, "score outside [0,1]");
      const RleMask& m = inst.mask;
      if (m.height() != res.height || m.width() != res.width) {
        add(index, i,
            "mask size " + std::to_string(m.height()) + "x" + std::to_string(m.width()) +
                " (h x w) does not match resolution " + std::to_string(res.height) + "x" +
                std::to_string(res.width));
      }
      if (!m.size_consistent()) {
        const auto sum = std::accumulate(m.counts().begin(), m.counts().end(), std::uint64_t{0});
        add(index, i,
            "RLE counts sum " + std::to_string(sum) + " != " +
                std::to_string(std::uint64_t(m.height()) * std::uint64_t(m.width())));
        continue;
      }
      if (!m.canonical()) add(index, i, "non-canonical RLE (empty interior run)");
      const auto box = m.bbox();
      if (!box) {
        add(index, i, "empty mask");
      } else if (!(*box == inst.bbox)) {
        add(index, i,
            "bbox [" + std::to_string(inst.bbox.x0) + "," + std::to_string(inst.bbox.y0) + "," +
                std::to_string(inst.bbox.x1) + "," + std::to_string(inst.bbox.y1) +
                "] is not the tight mask bbox [" + std::to_string(box->x0) + "," +
                std::to_string(box->y0) + "," + std::to_string(box->x1) + "," +
                std::to_string(box->y1) + "]");
      }
    }
  }
  return report;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw FormatError(where.empty() ? what : where + ": " + what);
}

int get_int(const json& v, const std::string& where, const char* what) {
  if (!v.is_number_integer()) fail(where, std::string(what) + " must be an integer");
  return v.get<int>();
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

Instance parse_instance(const json& j, const std::string& where) {
  Instance inst;
  const json& id = require(j, "id", where);
  const json& label = require(j, "label", where);
  const json& score = require(j, "score", where);
  const json& bbox = require(j, "bbox", where);
  const json& rle = require(j, "rle", where);
  if (!id.is_string()) fail(where, "'id' must be a string");
  if (!label.is_string()) fail(where, "'label' must be a string");
  if (!score.is_number()) fail(where, "'score' must be a number");
  if (!bbox.is_array() || bbox.size() != 4) fail(where, "'bbox' must be [x0,y0,x1,y1]");
  inst.id = id.get<std::string>();
  inst.label = label.get<std::string>();
  inst.score = score.get<double>();
  inst.bbox = {get_int(bbox[0], where, "bbox"), get_int(bbox[1], where, "bbox"),
               get_int(bbox[2], where, "bbox"), get_int(bbox[3], where, "bbox")};

  const json& size = require(rle, "size", where);
  const json& counts = require(rle, "counts", where);
  if (!size.is_array() || size.size() != 2) fail(where, "'rle.size' must be [h,w]");
  const int h = get_int(size[0], where, "rle.size");
  const int w = get_int(size[1], where, "rle.size");
  if (h < 0 || w < 0) fail(where, "negative rle.size");
  if (!counts.is_array()) fail(where, "'rle.counts' must be an array");
  std::vector<std::uint32_t> runs;
  runs.reserve(counts.size());
  for (const auto& c : counts) {
    if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0)) {
      fail(where, "rle.counts entries must be non-negative integers");
    }
    const auto v = c.get<std::uint64_t>();
    if (v > 0xFFFFFFFFull) fail(where, "rle.counts entry too large");
    runs.push_back(static_cast<std::uint32_t>(v));
  }
  inst.mask = RleMask(h, w, std::move(runs));
  return inst;
}

}  // namespace

MaskSet parse_maskset(const json& doc) {
  MaskSet set;
  const json& res = require(doc, "resolution", "");
  if (!res.is_array() || res.size() != 2) fail("", "'resolution' must be [w,h]");
  set.resolution = {get_int(res[0], "resolution", "width"), get_int(res[1], "resolution", "height")};

  const json& classes = require(doc, "classes", "");
  if (!classes.is_object()) fail("", "'classes' must be an object");
  for (const auto& [label, desc] : classes.items()) {
    if (!desc.is_string()) fail("classes", "description of '" + label + "' must be a string");
    set.class_table[label] = desc.get<std::string>();
  }

  const json& frames = require(doc, "frames", "");
  if (!frames.is_array()) fail("", "'frames' must be an array");
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const std::string fwhere = "frames[" + std::to_string(fi) + "]";
    const json& fj = frames[fi];
    const json& index = require(fj, "frame", fwhere);
    if (!index.is_number_integer()) fail(fwhere, "'frame' must be an integer");
    FrameMasks fm;
    fm.frame_index = index.get<std::int64_t>();
    const std::string where = "frame " + std::to_string(fm.frame_index);
    const json& instances = require(fj, "instances", where);
    if (!instances.is_array()) fail(where, "'instances' must be an array");
    for (std::size_t ii = 0; ii < instances.size(); ++ii) {
      fm.instances.push_back(parse_instance(instances[ii], where + ", instance " + std::to_string(ii)));
    }
    if (!set.frames.emplace(fm.frame_index, std::move(fm)).second) fail(where, "duplicate frame index");
  }
  return set;
}

MaskSet load_maskset_document(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw FormatError("mask file is not a valid document");
  MaskSet set = parse_maskset(doc);
  const auto report = validate_maskset(set);
  if (!report.ok()) {
    std::string msg = report.violations.front().describe();
    if (report.violations.size() > 1) {
      msg += " (and " + std::to_string(report.violations.size() - 1) + " more violations)";
    }
    throw FormatError(msg);
  }
  return set;
}

MaskSet load_maskset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open mask file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_maskset_document(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

nlohmann::ordered_json maskset_to_json(const MaskSet& set) {
  nlohmann::ordered_json doc;
  doc["resolution"] = {set.resolution.width, set.resolution.height};
  doc["classes"] = nlohmann::ordered_json::object();
  for (const auto& [label, desc] : set.class_table) doc["classes"][label] = desc;
  doc["frames"] = nlohmann::ordered_json::array();
  for (const auto& [index, frame] : set.frames) {
    nlohmann::ordered_json fj;
    fj["frame"] = index;
    fj["instances"] = nlohmann::ordered_json::array();
    for (const auto& inst : frame.instances) {
      nlohmann::ordered_json ij;
      ij["id"] = inst.id;
      ij["label"] = inst.label;
      ij["score"] = inst.score;
      ij["bbox"] = {inst.bbox.x0, inst.bbox.y0, inst.bbox.x1, inst.bbox.y1};
      ij["rle"]["size"] = {inst.mask.height(), inst.mask.width()};
      ij["rle"]["counts"] = inst.mask.counts();
      fj["instances"].push_back(std::move(ij));
    }
    doc["frames"].push_back(std::move(fj));
  }
  return doc;
}

std::string serialize_maskset(const MaskSet& set) { return maskset_to_json(set).dump() + "\n"; }

void save_maskset(const MaskSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << serialize_maskset(set);
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace gazemap
