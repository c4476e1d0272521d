// Copyright 2026 The dst Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "dst/dataset.hpp"
#include "json.hpp"

namespace dst {

namespace {

using json = nlohmann::json;

enum class Section { kNone, kImages, kAnnotations, kCategories };

// Fields of one record in any of the three sections. Only what ingestion
// consumes is kept.
struct Record {
  std::optional<std::int64_t> id;
  std::optional<std::int64_t> image_id;
  std::optional<std::int64_t> category_id;
  std::optional<std::int64_t> width;
  std::optional<std::int64_t> height;
  std::optional<std::int64_t> iscrowd;
  std::optional<std::string> file_name;
  std::optional<std::string> name;
  std::vector<double> bbox;
  bool has_bbox = false;
  bool bad_bbox = false;
  std::string bad_field;
};

struct RawAnnotation {
  std::int64_t id;
  std::int64_t image_id;
  std::int64_t category_id;
  bool iscrowd;
  double x, y, w, h;
};

std::string describe(const Record& r, std::size_t ordinal) {
  if (r.id) return "id " + std::to_string(*r.id);
  return "#" + std::to_string(ordinal) + " (no id)";
}

// SAX consumer: keeps only images/annotations/categories fields, so the
// multi-hundred-megabyte segmentation payloads of real COCO files are never
// materialized.
class CocoSax : public nlohmann::json_sax<json> {
 public:
  bool null() override { return scalar_ignored(); }
  bool boolean(bool v) override { return integer(v ? 1 : 0, true); }
  bool number_integer(number_integer_t v) override {
    return integer(static_cast<std::int64_t>(v), false);
  }
  bool number_unsigned(number_unsigned_t v) override {
    return integer(static_cast<std::int64_t>(v), false);
  }
  bool number_float(number_float_t v, const string_t&) override {
    if (in_bbox()) {
      record_.bbox.push_back(v);
      return true;
    }
    if (depth_ == 3 && section_ != Section::kNone) {
      if (v == std::floor(v) && std::fabs(v) < 0x1p53) {
        return integer(static_cast<std::int64_t>(v), false);
      }
      flag_integer_field_bad();
    }
    return true;
  }
  bool string(string_t& v) override {
    if (in_bbox()) {
      record_.bad_bbox = true;
      return true;
    }
    if (depth_ == 3 && section_ != Section::kNone) {
      if (field_ == "file_name") record_.file_name = v;
      if (field_ == "name") record_.name = v;
      if (is_integer_field()) flag_integer_field_bad();
    }
    return true;
  }
  bool binary(binary_t&) override { return true; }

  bool start_object(std::size_t) override {
    ++depth_;
    if (depth_ == 3 && section_ != Section::kNone) {
      record_ = Record{};
      ++ordinal_;
    } else if (depth_ == 2 && section_ != Section::kNone) {
      throw ParseError("'" + section_name() + "' must be an array");
    }
    return true;
  }
  bool end_object() override {
    if (depth_ == 3 && section_ != Section::kNone) finish_record();
    --depth_;
    return true;
  }
  bool start_array(std::size_t) override {
    ++depth_;
    if (depth_ == 2) {
      if (section_ == Section::kImages) seen_images_ = true;
      if (section_ == Section::kAnnotations) seen_annotations_ = true;
      if (section_ == Section::kCategories) seen_categories_ = true;
    }
    if (depth_ == 4 && section_ == Section::kAnnotations && field_ == "bbox") {
      record_.has_bbox = true;
      record_.bbox.clear();
    }
    return true;
  }
  bool end_array() override {
    --depth_;
    return true;
  }
  bool key(string_t& k) override {
    if (depth_ == 1) {
      if (k == "images") {
        section_ = Section::kImages;
      } else if (k == "annotations") {
        section_ = Section::kAnnotations;
      } else if (k == "categories") {
        section_ = Section::kCategories;
      } else {
        section_ = Section::kNone;
      }
    } else if (depth_ == 3) {
      field_ = k;
    }
    return true;
  }
  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    std::string where;
    if (depth_ >= 3 && section_ != Section::kNone) {
      where = " inside " + section_name() + " record " +
              describe(record_, ordinal_);
    }
    throw ParseError("malformed annotation document at byte " +
                     std::to_string(position) + where + ": " + ex.what());
  }

  Dataset build() {
    if (!seen_images_) throw ParseError("missing 'images' array");
    if (!seen_annotations_) throw ParseError("missing 'annotations' array");
    if (!seen_categories_) throw ParseError("missing 'categories' array");

    std::unordered_map<std::int64_t, std::size_t> image_index;
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (!image_index.emplace(raw(images_[i].id), i).second) {
        throw ParseError("images record id " +
                         std::to_string(raw(images_[i].id)) + ": duplicate id");
      }
    }
    std::size_t dropped = 0;
    std::unordered_map<std::int64_t, bool> annotation_seen;
    for (const RawAnnotation& ra : annotations_) {
      if (!annotation_seen.emplace(ra.id, true).second) {
        throw ParseError("annotations record id " + std::to_string(ra.id) +
                         ": duplicate id");
      }
      auto it = image_index.find(ra.image_id);
      if (it == image_index.end()) {
        throw ParseError("annotations record id " + std::to_string(ra.id) +
                         ": unknown image_id " + std::to_string(ra.image_id));
      }
      ImageRecord& img = images_[it->second];
      BoundingBox box = BoundingBox::from_pixels(ra.x, ra.y, ra.w, ra.h);
      if (box.valid()) box = box.clamped(img.width, img.height);
      if (!box.valid()) {
        ++dropped;
        continue;
      }
      img.annotations.push_back(InstanceAnnotation{
          AnnotationId{ra.id}, img.id, box, CategoryId{ra.category_id},
          ra.iscrowd});
    }
    if (dropped > 0) {
      spdlog::warn("dropped {} annotation(s) with non-positive box extent",
                   dropped);
    }
    return Dataset(std::move(images_), std::move(categories_), dropped);
  }

 private:
  bool in_bbox() const {
    return depth_ == 4 && section_ == Section::kAnnotations &&
           field_ == "bbox" && record_.has_bbox;
  }
  bool is_integer_field() const {
    return field_ == "id" || field_ == "image_id" ||
           field_ == "category_id" || field_ == "width" ||
           field_ == "height" || field_ == "iscrowd";
  }
  void flag_integer_field_bad() {
    if (is_integer_field() && record_.bad_field.empty()) {
      record_.bad_field = field_;
    }
  }
  bool scalar_ignored() {
    if (in_bbox()) record_.bad_bbox = true;
    return true;
  }
  bool integer(std::int64_t v, bool is_bool) {
    if (in_bbox()) {
      if (is_bool) {
        record_.bad_bbox = true;
      } else {
        record_.bbox.push_back(static_cast<double>(v));
      }
      return true;
    }
    if (depth_ != 3 || section_ == Section::kNone) return true;
    if (field_ == "id") record_.id = v;
    if (field_ == "image_id") record_.image_id = v;
    if (field_ == "category_id") record_.category_id = v;
    if (field_ == "width") record_.width = v;
    if (field_ == "height") record_.height = v;
    if (field_ == "iscrowd") record_.iscrowd = v;
    return true;
  }

  std::string section_name() const {
    switch (section_) {
      case Section::kImages:
        return "images";
      case Section::kAnnotations:
        return "annotations";
      case Section::kCategories:
        return "categories";
      case Section::kNone:
        break;
    }
    return "?";
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(section_name() + " record " + describe(record_, ordinal_) +
                     ": " + what);
  }

  void finish_record() {
    const Record& r = record_;
    if (!r.bad_field.empty()) fail("field '" + r.bad_field + "' is not an integer");
    if (!r.id) fail("missing 'id'");
    switch (section_) {
      case Section::kImages: {
        if (!r.width || !r.height) fail("missing 'width' or 'height'");
        if (*r.width <= 0 || *r.height <= 0) fail("non-positive dimensions");
        if (*r.width > (1 << 20) || *r.height > (1 << 20)) fail("dimensions too large");
        images_.push_back(ImageRecord{ImageId{*r.id}, static_cast<int>(*r.width),
                                      static_cast<int>(*r.height),
                                      r.file_name.value_or(""), {}});
        break;
      }
      case Section::kAnnotations: {
        if (!r.image_id) fail("missing 'image_id'");
        if (!r.has_bbox) fail("missing 'bbox'");
        if (r.bad_bbox || r.bbox.size() != 4) fail("'bbox' must hold 4 numbers");
        for (double v : r.bbox) {
          if (!std::isfinite(v) || std::fabs(v) > 1e12) fail("'bbox' value out of range");
        }
        annotations_.push_back(RawAnnotation{
            *r.id, *r.image_id, r.category_id.value_or(0),
            r.iscrowd.value_or(0) != 0, r.bbox[0], r.bbox[1], r.bbox[2],
            r.bbox[3]});
        break;
      }
      case Section::kCategories:
        categories_[CategoryId{*r.id}] = r.name.value_or("");
        break;
      case Section::kNone:
        break;
    }
  }

  int depth_ = 0;
  Section section_ = Section::kNone;
  std::string field_;
  Record record_;
  std::size_t ordinal_ = 0;
  bool seen_images_ = false;
  bool seen_annotations_ = false;
  bool seen_categories_ = false;
  std::vector<ImageRecord> images_;
  std::vector<RawAnnotation> annotations_;
  std::map<CategoryId, std::string> categories_;
};

}  // namespace

Dataset parse_annotations(std::string_view document) {
  CocoSax sax;
  json::sax_parse(document.begin(), document.end(), &sax);
  return sax.build();
}

Dataset load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open annotation file '" + path.string() + "'");
  }
  CocoSax sax;
  json::sax_parse(in, &sax);
  return sax.build();
}

void write_annotations(const std::filesystem::path& path, const Dataset& ds,
                       const std::map<ImageId, std::vector<ImageId>>& provenance) {
  nlohmann::ordered_json doc;
  doc["images"] = nlohmann::ordered_json::array();
  doc["annotations"] = nlohmann::ordered_json::array();
  doc["categories"] = nlohmann::ordered_json::array();
  for (const ImageRecord& img : ds.images()) {
    nlohmann::ordered_json entry = {{"id", raw(img.id)},
                                    {"width", img.width},
                                    {"height", img.height},
                                    {"file_name", img.file_name}};
    if (auto it = provenance.find(img.id); it != provenance.end()) {
      auto& src = entry["source_ids"] = nlohmann::ordered_json::array();
      for (ImageId id : it->second) src.push_back(raw(id));
    }
    doc["images"].push_back(std::move(entry));
    for (const InstanceAnnotation& a : img.annotations) {
      doc["annotations"].push_back(
          {{"id", raw(a.id)},
           {"image_id", raw(a.image_id)},
           {"bbox", {a.box.x(), a.box.y(), a.box.width(), a.box.height()}},
           {"area", a.box.area()},
           {"category_id", raw(a.category_id)},
           {"iscrowd", a.iscrowd ? 1 : 0}});
    }
  }
  for (const auto& [id, name] : ds.categories()) {
    doc["categories"].push_back({{"id", raw(id)}, {"name", name}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace dst
