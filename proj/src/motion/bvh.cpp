#include "motion/bvh.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <vector>

#include "common/error.hpp"
#include "motion/rotation.hpp"

namespace speakgen::motion {
namespace {

enum class Channel { kXpos, kYpos, kZpos, kXrot, kYrot, kZrot };

struct Token {
  std::string_view text;
  int line;
};

struct ParsedJoint {
  std::vector<Channel> channels;
};

std::vector<Token> tokenize(std::string_view text, std::size_t end, int first_line) {
  std::vector<Token> tokens;
  int line = first_line;
  std::size_t i = 0;
  while (i < end) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else {
      const std::size_t start = i;
      while (i < end && text[i] != ' ' && text[i] != '\t' && text[i] != '\r' && text[i] != '\n') ++i;
      tokens.push_back({text.substr(start, i - start), line});
    }
  }
  return tokens;
}

double parse_number(std::string_view s, int line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(line, "expected a number, got '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value '" + std::string(s) + "'");
  return v;
}

class HierarchyParser {
 public:
  explicit HierarchyParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  void parse() {
    expect("HIERARCHY");
    expect("ROOT");
    parse_joint(-1);
    if (pos_ != tokens_.size()) throw ParseError(tokens_[pos_].line, "unexpected token '" +
                                                                         std::string(tokens_[pos_].text) + "'");
  }

  std::vector<Joint> joints;
  std::vector<ParsedJoint> channels;

 private:
  const Token& next(const char* what) {
    if (pos_ >= tokens_.size())
      throw ParseError(tokens_.empty() ? 1 : tokens_.back().line, std::string("unexpected end of header, expected ") + what);
    return tokens_[pos_++];
  }

  void expect(std::string_view word) {
    const Token& t = next(std::string(word).c_str());
    if (t.text != word) throw ParseError(t.line, "expected '" + std::string(word) + "', got '" + std::string(t.text) + "'");
  }

  Eigen::Vector3d parse_offset() {
    expect("OFFSET");
    Eigen::Vector3d v;
    for (int k = 0; k < 3; ++k) {
      const Token& t = next("offset value");
      v(k) = parse_number(t.text, t.line);
    }
    return v;
  }

  void parse_joint(int parent) {
    const Token& name = next("joint name");
    expect("{");
    Joint joint;
    joint.name = std::string(name.text);
    joint.parent = parent;
    joint.offset = parse_offset();
    const int index = static_cast<int>(joints.size());
    joints.push_back(joint);
    channels.emplace_back();

    expect("CHANNELS");
    const Token& count_tok = next("channel count");
    const int count = static_cast<int>(parse_number(count_tok.text, count_tok.line));
    if (count < 0 || count > 6) throw ParseError(count_tok.line, "invalid channel count");
    for (int k = 0; k < count; ++k) {
      const Token& t = next("channel name");
      channels[static_cast<std::size_t>(index)].channels.push_back(parse_channel(t));
    }

    while (true) {
      const Token& t = next("JOINT, End or }");
      if (t.text == "}") return;
      if (t.text == "JOINT") {
        parse_joint(index);
      } else if (t.text == "End") {
        expect("Site");
        expect("{");
        joints[static_cast<std::size_t>(index)].end_site = parse_offset();
        expect("}");
      } else {
        throw ParseError(t.line, "unexpected token '" + std::string(t.text) + "' in joint '" + joint.name + "'");
      }
    }
  }

  static Channel parse_channel(const Token& t) {
    if (t.text == "Xposition") return Channel::kXpos;
    if (t.text == "Yposition") return Channel::kYpos;
    if (t.text == "Zposition") return Channel::kZpos;
    if (t.text == "Xrotation") return Channel::kXrot;
    if (t.text == "Yrotation") return Channel::kYrot;
    if (t.text == "Zrotation") return Channel::kZrot;
    throw ParseError(t.line, "unknown channel '" + std::string(t.text) + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

Eigen::Vector3d axis_vector(const std::string& spec) {
  std::string_view s = spec;
  double sign = 1.0;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    sign = s[0] == '-' ? -1.0 : 1.0;
    s.remove_prefix(1);
  }
  if (s == "x" || s == "X") return sign * Eigen::Vector3d::UnitX();
  if (s == "y" || s == "Y") return sign * Eigen::Vector3d::UnitY();
  if (s == "z" || s == "Z") return sign * Eigen::Vector3d::UnitZ();
  throw ValidationError("axis map entry '" + spec + "' must be one of [+-]x, [+-]y, [+-]z");
}

void append_fixed(std::string& out, double v) {
  char buf[64];
  if (std::abs(v) < 5e-7) v = 0.0;  // avoid "-0.000000"
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

void write_joint(std::string& out, const Skeleton& skeleton, int index, int depth) {
  const Joint& j = skeleton.joint(index);
  const std::string indent(static_cast<std::size_t>(depth), '\t');
  out += indent + (j.parent < 0 ? "ROOT " : "JOINT ") + j.name + "\n";
  out += indent + "{\n";
  out += indent + "\tOFFSET ";
  append_fixed(out, j.offset.x());
  out += ' ';
  append_fixed(out, j.offset.y());
  out += ' ';
  append_fixed(out, j.offset.z());
  out += '\n';
  out += indent + (j.parent < 0 ? "\tCHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation\n"
                                : "\tCHANNELS 3 Zrotation Yrotation Xrotation\n");
  const auto kids = skeleton.children(index);
  for (int child : kids) write_joint(out, skeleton, child, depth + 1);
  if (j.end_site || kids.empty()) {
    const Eigen::Vector3d site = j.end_site.value_or(Eigen::Vector3d::Zero());
    out += indent + "\tEnd Site\n" + indent + "\t{\n" + indent + "\t\tOFFSET ";
    append_fixed(out, site.x());
    out += ' ';
    append_fixed(out, site.y());
    out += ' ';
    append_fixed(out, site.z());
    out += "\n" + indent + "\t}\n";
  }
  out += indent + "}\n";
}

void write_order(const Skeleton& s, int index, std::vector<int>& order) {
  order.push_back(index);
  for (int c : s.children(index)) write_order(s, c, order);
}

}  // namespace

Eigen::Matrix3d AxisMap::matrix() const {
  Eigen::Matrix3d p;
  for (int i = 0; i < 3; ++i) p.row(i) = axis_vector(axes[static_cast<std::size_t>(i)]).transpose();
  require(std::abs(std::abs(p.determinant()) - 1.0) < 1e-12, "axis map must be a permutation of x, y, z");
  return p;
}

BvhDocument parse_bvh(std::string_view text, const AxisMap& axis_map) {
  const Eigen::Matrix3d remap = axis_map.matrix();

  // Split at the MOTION keyword; the header is free-form, the body line-based.
  std::size_t motion_at = std::string_view::npos;
  int motion_line = 1;
  {
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
      const std::size_t eol = std::min(text.find('\n', i), text.size());
      const auto words = split_ws(text.substr(i, eol - i));
      if (!words.empty() && words[0] == "MOTION") {
        motion_at = i;
        motion_line = line;
        break;
      }
      i = eol + 1;
      ++line;
    }
  }
  if (motion_at == std::string_view::npos) {
    int lines = 1;
    for (char c : text) lines += c == '\n';
    throw ParseError(lines, "missing MOTION section");
  }

  HierarchyParser header(tokenize(text, motion_at, 1));
  header.parse();

  // Body lines after MOTION.
  std::vector<std::pair<int, std::string_view>> lines;
  {
    std::size_t i = motion_at;
    int line = motion_line;
    while (i < text.size()) {
      const std::size_t eol = std::min(text.find('\n', i), text.size());
      lines.emplace_back(line, text.substr(i, eol - i));
      i = eol + 1;
      ++line;
    }
  }
  std::size_t cursor = 1;  // skip "MOTION"
  auto next_nonempty = [&]() -> std::optional<std::pair<int, std::vector<std::string_view>>> {
    while (cursor < lines.size()) {
      auto words = split_ws(lines[cursor].second);
      const int line = lines[cursor].first;
      ++cursor;
      if (!words.empty()) return std::make_pair(line, std::move(words));
    }
    return std::nullopt;
  };

  const auto frames_line = next_nonempty();
  if (!frames_line || frames_line->second.size() != 2 || frames_line->second[0] != "Frames:")
    throw ParseError(frames_line ? frames_line->first : motion_line, "expected 'Frames: <count>'");
  const double frame_count_value = parse_number(frames_line->second[1], frames_line->first);
  if (frame_count_value < 1 || frame_count_value != std::floor(frame_count_value))
    throw ParseError(frames_line->first, "frame count must be a positive integer");
  const int frame_count = static_cast<int>(frame_count_value);

  const auto time_line = next_nonempty();
  if (!time_line || time_line->second.size() != 3 || time_line->second[0] != "Frame" ||
      time_line->second[1] != "Time:")
    throw ParseError(time_line ? time_line->first : frames_line->first, "expected 'Frame Time: <seconds>'");
  const double frame_time = parse_number(time_line->second[2], time_line->first);
  if (!(frame_time > 0.0)) throw ParseError(time_line->first, "frame time must be positive");

  std::size_t channel_total = 0;
  for (const auto& pj : header.channels) channel_total += pj.channels.size();

  const int joint_count = static_cast<int>(header.joints.size());
  for (auto& j : header.joints) {
    j.offset = remap * j.offset;
    if (j.end_site) *j.end_site = remap * *j.end_site;
  }
  BvhDocument doc;
  try {
    doc.skeleton = Skeleton(header.joints);
  } catch (const ValidationError& e) {
    throw ParseError(1, e.what());
  }

  MotionClip& clip = doc.clip;
  clip = MotionClip::rest(frame_count, joint_count, 1.0 / frame_time);
  const Eigen::Matrix3d remap_t = remap.transpose();
  const Eigen::Vector3d root_offset = doc.skeleton.joint(0).offset;
  const bool identity_map = axis_map.is_identity();

  int last_line = time_line->first;
  for (int f = 0; f < frame_count; ++f) {
    const auto row = next_nonempty();
    if (!row)
      throw ParseError(last_line + 1, "frame count mismatch: header declares " + std::to_string(frame_count) +
                                          " frames, found " + std::to_string(f));
    last_line = row->first;
    if (row->second.size() != channel_total)
      throw ParseError(row->first, "channel count mismatch: expected " + std::to_string(channel_total) +
                                       " values, found " + std::to_string(row->second.size()));
    std::size_t k = 0;
    for (int j = 0; j < joint_count; ++j) {
      Eigen::Vector3d position = Eigen::Vector3d::Zero();
      Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
      for (Channel ch : header.channels[static_cast<std::size_t>(j)].channels) {
        const double v = parse_number(row->second[k++], row->first);
        switch (ch) {
          case Channel::kXpos: position.x() = v; break;
          case Channel::kYpos: position.y() = v; break;
          case Channel::kZpos: position.z() = v; break;
          case Channel::kXrot: rotation = rotation * quat_from_euler_deg({v, 0, 0}, "XYZ"); break;
          case Channel::kYrot: rotation = rotation * quat_from_euler_deg({0, v, 0}, "XYZ"); break;
          case Channel::kZrot: rotation = rotation * quat_from_euler_deg({0, 0, v}, "XYZ"); break;
        }
      }
      rotation.normalize();
      if (!identity_map) {
        const Eigen::Matrix3d r = remap * rotation.toRotationMatrix() * remap_t;
        rotation = Eigen::Quaterniond(r).normalized();
      }
      clip.rotation(f, j) = rotation;
      // Non-root position channels are ignored; offsets stay fixed.
      if (j == 0) clip.root_translation.row(f) = (root_offset + remap * position).transpose();
    }
  }
  if (const auto extra = next_nonempty())
    throw ParseError(extra->first, "frame count mismatch: more rows than the declared " +
                                       std::to_string(frame_count) + " frames");
  return doc;
}

std::string write_bvh(const Skeleton& skeleton, const MotionClip& clip) {
  require(clip.joint_count == skeleton.joint_count(), "clip does not match skeleton");
  std::string out = "HIERARCHY\n";
  write_joint(out, skeleton, 0, 0);
  out += "MOTION\nFrames: " + std::to_string(clip.frames()) + "\nFrame Time: ";
  append_fixed(out, 1.0 / clip.fps);
  out += '\n';

  std::vector<int> order;
  write_order(skeleton, 0, order);
  const Eigen::Vector3d root_offset = skeleton.joint(0).offset;
  for (int f = 0; f < clip.frames(); ++f) {
    const Eigen::Vector3d p = clip.root_translation.row(f).transpose() - root_offset;
    bool first = true;
    auto emit = [&](double v) {
      if (!first) out += ' ';
      first = false;
      append_fixed(out, v);
    };
    for (int j : order) {
      if (j == 0) {
        emit(p.x());
        emit(p.y());
        emit(p.z());
      }
      const Eigen::Vector3d zyx = euler_zyx_deg_from_quat(clip.rotation(f, j));
      emit(zyx(0));
      emit(zyx(1));
      emit(zyx(2));
    }
    out += '\n';
  }
  return out;
}

}  // namespace speakgen::motion
