#include "t3dp/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "t3dp/error.hpp"

namespace t3dp::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order and assume little-endian");

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr char kDetectionsMagic[4] = {'T', '3', 'D', 'D'};
constexpr char kWeightsMagic[4] = {'T', '3', 'D', 'P'};
constexpr std::size_t kCropFields = 9;

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::uint32_t crc_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void put_doubles(std::span<const double> v) {
    put_bytes(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  std::vector<char>& buffer() { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<char>& buf, std::string what) : buf_(buf), what_(std::move(what)) {}

  template <class T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (n > buf_.size() - pos_) throw ChecksumError(what_ + ": truncated input");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  void get_doubles(std::span<double> out) {
    std::memcpy(out.data(), take(out.size() * sizeof(double)), out.size() * sizeof(double));
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::vector<char>& buf_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::array<double, kCropFields> crop_fields(const CameraCrop& c) {
  return {c.image_w, c.image_h, c.center_x, c.center_y, c.box_size,
          c.cam_scale, c.cam_tx, c.cam_ty, c.focal};
}

CameraCrop crop_from(std::span<const double> v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
}

void check_finite(std::span<const double> v, const std::string& field,
                  const std::string& where) {
  if (!all_finite(v)) throw FormatError(where + ": field '" + field + "' has non-finite values");
}

std::vector<double> number_array(const json& j, const char* field, std::size_t expected,
                                 const std::string& where) {
  if (!j.contains(field)) throw FormatError(where + ": missing field '" + field + "'");
  const json& a = j.at(field);
  if (!a.is_array()) throw FormatError(where + ": field '" + field + "' is not an array");
  if (a.size() != expected)
    throw FormatError(where + ": field '" + field + "' has length " + std::to_string(a.size()) +
                      ", expected " + std::to_string(expected));
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& x : a) {
    if (!x.is_number()) throw FormatError(where + ": field '" + field + "' has a non-number");
    out.push_back(x.get<double>());
  }
  check_finite(out, field, where);
  return out;
}

void sort_detections(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    return std::tie(a.frame, a.det_key) < std::tie(b.frame, b.det_key);
  });
}

std::vector<Detection> read_binary_detections(const std::vector<char>& buf,
                                              const std::string& name) {
  Reader r(buf, name);
  r.take(sizeof kDetectionsMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kDetectionsVersion)
    throw VersionError(name + ": detections version " + std::to_string(version) +
                       " is not supported");
  const auto count = r.get<std::uint64_t>();
  const std::size_t payload_start = r.pos();
  // Verify the trailer before parsing so truncation and bit flips surface as
  // checksum failures rather than as whatever the damaged record decodes to.
  if (buf.size() < payload_start + sizeof(std::uint32_t))
    throw ChecksumError(name + ": truncated detections file");
  const std::size_t trailer = buf.size() - sizeof(std::uint32_t);
  std::uint32_t stored = 0;
  std::memcpy(&stored, buf.data() + trailer, sizeof stored);
  if (stored != crc_of(buf.data() + payload_start, trailer - payload_start))
    throw ChecksumError(name + ": detections checksum mismatch (corrupt or truncated)");
  std::vector<Detection> dets;
  std::vector<double> crop(kCropFields), kps(kKeypointDim), app(kAppearanceDim),
      pose(kPoseDim);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::string where = name + ": record " + std::to_string(k);
    Detection d;
    d.frame = r.get<std::int64_t>();
    const auto key_len = r.get<std::uint32_t>();
    d.det_key.assign(r.take(key_len), key_len);
    const auto has_gt = r.get<std::uint8_t>();
    const auto gt = r.get<std::int64_t>();
    if (has_gt) d.gt_id = gt;
    r.get_doubles(crop);
    r.get_doubles(kps);
    r.get_doubles(app);
    r.get_doubles(pose);
    check_finite(crop, "crop", where);
    check_finite(kps, "keypoints", where);
    check_finite(app, "appearance", where);
    check_finite(pose, "pose", where);
    d.crop = crop_from(crop);
    d.keypoints.joints = unflatten(kps);
    d.appearance = AppearanceVec(app);
    d.pose = PoseVec(pose);
    dets.push_back(std::move(d));
  }
  if (r.pos() != trailer) throw FormatError(name + ": record count does not match payload");
  return dets;
}

void write_binary_detections(std::ostream& out, const std::vector<Detection>& dets) {
  Writer header;
  header.put_bytes(kDetectionsMagic, sizeof kDetectionsMagic);
  header.put(kDetectionsVersion);
  header.put(static_cast<std::uint64_t>(dets.size()));
  Writer body;
  for (const auto& d : dets) {
    body.put(d.frame);
    body.put(static_cast<std::uint32_t>(d.det_key.size()));
    body.put_bytes(d.det_key.data(), d.det_key.size());
    body.put(static_cast<std::uint8_t>(d.gt_id.has_value()));
    body.put(d.gt_id.value_or(0));
    body.put_doubles(crop_fields(d.crop));
    body.put_doubles(flatten(d.keypoints.joints));
    body.put_doubles(d.appearance.values());
    body.put_doubles(d.pose.values());
  }
  const auto crc = crc_of(body.buffer().data(), body.buffer().size());
  body.put(crc);
  out.write(header.buffer().data(), static_cast<std::streamsize>(header.buffer().size()));
  out.write(body.buffer().data(), static_cast<std::streamsize>(body.buffer().size()));
}

template <class Fn>
void for_each_line(const std::vector<char>& buf, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < buf.size()) {
    std::size_t end = start;
    while (end < buf.size() && buf[end] != '\n') ++end;
    ++line_no;
    std::string line(buf.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) fn(line, line_no);
    start = end + 1;
  }
}

std::int64_t integer_field(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field)) throw FormatError(where + ": missing field '" + field + "'");
  const json& v = j.at(field);
  if (!v.is_number_integer()) throw FormatError(where + ": field '" + field + "' is not an integer");
  return v.get<std::int64_t>();
}

std::string string_field(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field)) throw FormatError(where + ": missing field '" + field + "'");
  const json& v = j.at(field);
  if (!v.is_string()) throw FormatError(where + ": field '" + field + "' is not a string");
  return v.get<std::string>();
}

json parse_line(const std::string& line, const std::string& where) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw FormatError(where + ": expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw FormatError(where + ": " + e.what());
  }
}

}  // namespace

std::string detection_to_json_line(const Detection& d) {
  ordered_json j;
  j["frame"] = d.frame;
  j["det_key"] = d.det_key;
  j["gt_id"] = d.gt_id ? ordered_json(*d.gt_id) : ordered_json(nullptr);
  const auto crop = crop_fields(d.crop);
  j["crop"] = std::vector<double>(crop.begin(), crop.end());
  const auto kps = flatten(d.keypoints.joints);
  j["keypoints"] = std::vector<double>(kps.begin(), kps.end());
  j["appearance"] = std::vector<double>(d.appearance.values().begin(), d.appearance.values().end());
  j["pose"] = std::vector<double>(d.pose.values().begin(), d.pose.values().end());
  return j.dump();
}

Detection detection_from_json_line(const std::string& line, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no);
  const json j = parse_line(line, where);
  Detection d;
  d.frame = integer_field(j, "frame", where);
  d.det_key = string_field(j, "det_key", where);
  if (!j.contains("gt_id")) throw FormatError(where + ": missing field 'gt_id'");
  if (!j.at("gt_id").is_null()) d.gt_id = integer_field(j, "gt_id", where);
  d.crop = crop_from(number_array(j, "crop", kCropFields, where));
  d.keypoints.joints = unflatten(number_array(j, "keypoints", kKeypointDim, where));
  d.appearance = AppearanceVec(number_array(j, "appearance", kAppearanceDim, where));
  d.pose = PoseVec(number_array(j, "pose", kPoseDim, where));
  return d;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
  const auto buf = read_file(path);
  std::vector<Detection> dets;
  if (buf.size() >= sizeof kDetectionsMagic &&
      std::memcmp(buf.data(), kDetectionsMagic, sizeof kDetectionsMagic) == 0) {
    dets = read_binary_detections(buf, path.string());
  } else {
    for_each_line(buf, [&](const std::string& line, std::size_t line_no) {
      try {
        dets.push_back(detection_from_json_line(line, line_no));
      } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
      }
    });
  }
  sort_detections(dets);
  return dets;
}

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& dets,
                      DetectionFormat format) {
  std::vector<Detection> sorted = dets;
  sort_detections(sorted);
  auto out = open_out(path);
  if (format == DetectionFormat::binary) {
    write_binary_detections(out, sorted);
  } else {
    for (const auto& d : sorted) out << detection_to_json_line(d) << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

std::vector<TrackRecord> read_tracks(const std::filesystem::path& path) {
  const auto buf = read_file(path);
  std::vector<TrackRecord> tracks;
  for_each_line(buf, [&](const std::string& line, std::size_t line_no) {
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    const json j = parse_line(line, where);
    tracks.push_back({integer_field(j, "frame", where), string_field(j, "det_key", where),
                      integer_field(j, "track_id", where)});
  });
  std::stable_sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.det_key) < std::tie(b.frame, b.det_key);
  });
  return tracks;
}

void write_tracks(const std::filesystem::path& path, std::vector<TrackRecord> tracks) {
  std::stable_sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.det_key) < std::tie(b.frame, b.det_key);
  });
  auto out = open_out(path);
  for (const auto& t : tracks) {
    ordered_json j;
    j["frame"] = t.frame;
    j["det_key"] = t.det_key;
    j["track_id"] = t.track_id;
    out << j.dump() << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

void save_weights(const std::filesystem::path& path, const TransformerWeights& w,
                  const AttentionConfig& attention) {
  Writer header;
  header.put_bytes(kWeightsMagic, sizeof kWeightsMagic);
  header.put(kWeightsVersion);
  header.put(static_cast<std::uint64_t>(w.dims.app));
  header.put(static_cast<std::uint64_t>(w.dims.pose));
  header.put(static_cast<std::uint64_t>(w.dims.loc));
  header.put(static_cast<std::uint64_t>(w.blocks.size()));
  header.put(attention.beta_app);
  header.put(attention.beta_pose);
  header.put(attention.beta_loc);
  header.put(static_cast<std::uint64_t>(w.num_parameters()));

  auto out = open_out(path);
  out.write(header.buffer().data(), static_cast<std::streamsize>(header.buffer().size()));
  uLong crc = crc32(0L, Z_NULL, 0);
  for_each_tensor(w, [&](const std::string&, std::span<const double> t) {
    const auto* bytes = reinterpret_cast<const char*>(t.data());
    const std::size_t n = t.size_bytes();
    out.write(bytes, static_cast<std::streamsize>(n));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes), static_cast<uInt>(n));
  });
  const auto crc32v = static_cast<std::uint32_t>(crc);
  out.write(reinterpret_cast<const char*>(&crc32v), sizeof crc32v);
  if (!out) throw InputError("failed writing " + path.string());
}

WeightsFile load_weights(const std::filesystem::path& path,
                         const std::optional<AttributeDims>& expected) {
  const auto buf = read_file(path);
  const std::string name = path.string();
  Reader r(buf, name);
  try {
    if (std::memcmp(r.take(sizeof kWeightsMagic), kWeightsMagic, sizeof kWeightsMagic) != 0)
      throw FormatError(name + ": not a weights file (bad magic)");
  } catch (const FormatError&) {
    throw FormatError(name + ": not a weights file (bad magic)");
  }
  AttributeDims dims;
  std::uint64_t blocks = 0, count = 0;
  AttentionConfig attention;
  try {
    const auto version = r.get<std::uint32_t>();
    if (version != kWeightsVersion)
      throw VersionError(name + ": weights version " + std::to_string(version) +
                         " is not supported (expected " + std::to_string(kWeightsVersion) + ")");
    dims.app = r.get<std::uint64_t>();
    dims.pose = r.get<std::uint64_t>();
    dims.loc = r.get<std::uint64_t>();
    blocks = r.get<std::uint64_t>();
    attention.beta_app = r.get<double>();
    attention.beta_pose = r.get<double>();
    attention.beta_loc = r.get<double>();
    count = r.get<std::uint64_t>();
  } catch (const VersionError&) {
    throw;
  } catch (const FormatError&) {
    throw ChecksumError(name + ": truncated weights header");
  }
  if (expected && *expected != dims)
    throw DimensionError(name + ": weights have attribute dims " + std::to_string(dims.app) +
                         "/" + std::to_string(dims.pose) + "/" + std::to_string(dims.loc) +
                         ", engine expects " + std::to_string(expected->app) + "/" +
                         std::to_string(expected->pose) + "/" + std::to_string(expected->loc));
  if (blocks != kNumBlocks)
    throw DimensionError(name + ": weights declare " + std::to_string(blocks) +
                         " blocks, expected 3");
  const std::uint64_t per_block =
      5 * (dims.app * dims.app + dims.pose * dims.pose + dims.loc * dims.loc) +
      4 * (dims.app + dims.pose + dims.loc);
  if (count != per_block * blocks)
    throw DimensionError(name + ": declared payload does not match declared shapes");
  if (r.remaining() != count * sizeof(double) + sizeof(std::uint32_t))
    throw ChecksumError(name + ": payload length does not match header (truncated or padded)");

  const std::size_t payload_start = r.pos();
  WeightsFile file{TransformerWeights::zeros(dims), attention};
  for_each_tensor(file.weights, [&](const std::string&, std::span<double> t) { r.get_doubles(t); });
  const auto stored = r.get<std::uint32_t>();
  if (stored != crc_of(buf.data() + payload_start, count * sizeof(double)))
    throw ChecksumError(name + ": weights checksum mismatch");
  try {
    attention.validate();
  } catch (const ConfigError& e) {
    throw FormatError(name + ": " + e.what());
  }
  return file;
}

SimConfig sim_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("simulation config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
  SimConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "num_people") cfg.num_people = value.get<std::int64_t>();
      else if (key == "num_frames") cfg.num_frames = value.get<std::int64_t>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "appearance_noise_sigma") cfg.appearance_noise_sigma = value.get<double>();
      else if (key == "pose_drift_sigma") cfg.pose_drift_sigma = value.get<double>();
      else if (key == "walk_speed") cfg.walk_speed = value.get<double>();
      else if (key == "image_w") cfg.image_w = value.get<double>();
      else if (key == "image_h") cfg.image_h = value.get<double>();
      else if (key == "focal") cfg.focal = value.get<double>();
      else if (key == "appearance_scale") cfg.appearance_scale = value.get<double>();
      else if (key == "pose_scale") cfg.pose_scale = value.get<double>();
      else if (key == "shot_min_jump") cfg.shot_min_jump = value.get<double>();
      else if (key == "shot_changes") cfg.shot_changes = value.get<std::vector<std::int64_t>>();
      else if (key == "occlusions") {
        for (const auto& o : value)
          cfg.occlusions.push_back({o.at("person").get<std::int64_t>(),
                                    o.at("start_frame").get<std::int64_t>(),
                                    o.at("length").get<std::int64_t>()});
      } else {
        throw ConfigError("simulation config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("simulation config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string sim_config_to_json(const SimConfig& cfg) {
  ordered_json j;
  j["num_people"] = cfg.num_people;
  j["num_frames"] = cfg.num_frames;
  j["seed"] = cfg.seed;
  j["appearance_noise_sigma"] = cfg.appearance_noise_sigma;
  j["pose_drift_sigma"] = cfg.pose_drift_sigma;
  j["walk_speed"] = cfg.walk_speed;
  j["occlusions"] = ordered_json::array();
  for (const auto& o : cfg.occlusions)
    j["occlusions"].push_back(
        {{"person", o.person}, {"start_frame", o.start_frame}, {"length", o.length}});
  j["shot_changes"] = cfg.shot_changes;
  j["image_w"] = cfg.image_w;
  j["image_h"] = cfg.image_h;
  j["focal"] = cfg.focal;
  j["appearance_scale"] = cfg.appearance_scale;
  j["pose_scale"] = cfg.pose_scale;
  j["shot_min_jump"] = cfg.shot_min_jump;
  return j.dump(2);
}

std::string metrics_to_json(const MetricReport& r) {
  ordered_json j;
  j["ids"] = r.id_switches;
  j["mota"] = r.mota;
  j["idf1"] = r.idf1;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["num_gt"] = r.num_gt;
  j["num_pred"] = r.num_pred;
  j["idtp"] = r.idtp;
  j["idfp"] = r.idfp;
  j["idfn"] = r.idfn;
  return j.dump();
}

MetricReport metrics_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    MetricReport r;
    r.id_switches = j.at("ids").get<std::int64_t>();
    r.mota = j.at("mota").get<double>();
    r.idf1 = j.at("idf1").get<double>();
    r.fp = j.at("fp").get<std::int64_t>();
    r.fn = j.at("fn").get<std::int64_t>();
    r.num_gt = j.at("num_gt").get<std::int64_t>();
    r.num_pred = j.value("num_pred", std::int64_t{0});
    r.idtp = j.value("idtp", std::int64_t{0});
    r.idfp = j.value("idfp", std::int64_t{0});
    r.idfn = j.value("idfn", std::int64_t{0});
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics report: ") + e.what());
  }
}

}  // namespace t3dp::io
