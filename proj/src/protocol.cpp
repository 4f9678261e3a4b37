#include "live/protocol.hpp"

#include <json.hpp>

#include <utility>

namespace live {

using nlohmann::json;

Message Message::make_register(std::string robot, std::string spec_json) {
  Message m;
  m.type = MsgType::kRegister;
  m.robot = std::move(robot);
  m.spec_json = std::move(spec_json);
  return m;
}

Message Message::make_plan(std::string robot, std::vector<Pose2> viewpoints) {
  Message m;
  m.type = MsgType::kPlan;
  m.robot = std::move(robot);
  m.viewpoints = std::move(viewpoints);
  return m;
}

Message Message::make_update(std::string robot, int tick, const Pose2& believed,
                             const Pose2& lidar_fp, const Pose2& camera_fp) {
  Message m;
  m.type = MsgType::kUpdate;
  m.robot = std::move(robot);
  m.tick = tick;
  m.believed_pose = believed;
  m.lidar_fp_pose = lidar_fp;
  m.camera_fp_pose = camera_fp;
  return m;
}

Message Message::make_ack(int tick) {
  Message m;
  m.type = MsgType::kAck;
  m.tick = tick;
  return m;
}

Message Message::make_done(std::string robot) {
  Message m;
  m.type = MsgType::kDone;
  m.robot = std::move(robot);
  return m;
}

namespace {

bool pose_eq(const Pose2& a, const Pose2& b) {
  return a.x == b.x && a.y == b.y && a.theta == b.theta;
}

const char* type_name(MsgType t) {
  switch (t) {
    case MsgType::kRegister: return "register";
    case MsgType::kPlan: return "plan";
    case MsgType::kUpdate: return "update";
    case MsgType::kAck: return "ack";
    case MsgType::kDone: return "done";
  }
  return "ack";
}

json pose_to_json(const Pose2& p) { return json::array({p.x, p.y, p.theta}); }

Pose2 pose_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    throw MissingFieldError(std::string("field '") + field + "' is not a [x, y, theta] pose");
  }
  Pose2 p;
  // Wire poses are reproduced bit for bit: no renormalization on decode.
  p.x = j[0].get<double>();
  p.y = j[1].get<double>();
  p.theta = j[2].get<double>();
  return p;
}

const json& require(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) {
    throw MissingFieldError(std::string("message missing required field '") + field + "'");
  }
  return *it;
}

std::string require_string(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_string()) {
    throw MissingFieldError(std::string("field '") + field + "' must be a string");
  }
  return v.get<std::string>();
}

int require_int(const json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_number_integer()) {
    throw MissingFieldError(std::string("field '") + field + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

bool Message::operator==(const Message& o) const {
  if (type != o.type || robot != o.robot || spec_json != o.spec_json || tick != o.tick) {
    return false;
  }
  if (viewpoints.size() != o.viewpoints.size()) return false;
  for (size_t i = 0; i < viewpoints.size(); ++i) {
    if (!pose_eq(viewpoints[i], o.viewpoints[i])) return false;
  }
  return pose_eq(believed_pose, o.believed_pose) && pose_eq(lidar_fp_pose, o.lidar_fp_pose) &&
         pose_eq(camera_fp_pose, o.camera_fp_pose);
}

std::vector<uint8_t> encode_message(const Message& msg) {
  json j;
  j["type"] = type_name(msg.type);
  switch (msg.type) {
    case MsgType::kRegister:
      j["robot"] = msg.robot;
      j["spec"] = msg.spec_json;
      break;
    case MsgType::kPlan: {
      j["robot"] = msg.robot;
      json vps = json::array();
      for (const auto& p : msg.viewpoints) vps.push_back(pose_to_json(p));
      j["viewpoints"] = std::move(vps);
      break;
    }
    case MsgType::kUpdate:
      j["robot"] = msg.robot;
      j["tick"] = msg.tick;
      j["believed_pose"] = pose_to_json(msg.believed_pose);
      j["lidar_footprint_pose"] = pose_to_json(msg.lidar_fp_pose);
      j["camera_footprint_pose"] = pose_to_json(msg.camera_fp_pose);
      break;
    case MsgType::kAck:
      j["tick"] = msg.tick;
      break;
    case MsgType::kDone:
      j["robot"] = msg.robot;
      break;
  }
  const std::string payload = j.dump();
  const uint32_t n = static_cast<uint32_t>(payload.size());
  std::vector<uint8_t> out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<uint8_t>((n >> 24) & 0xFF));
  out.push_back(static_cast<uint8_t>((n >> 16) & 0xFF));
  out.push_back(static_cast<uint8_t>((n >> 8) & 0xFF));
  out.push_back(static_cast<uint8_t>(n & 0xFF));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Message decode_message(const uint8_t* data, size_t len, size_t* consumed) {
  if (len < 4) throw TruncatedFrameError("frame shorter than its 4-byte length prefix");
  const uint32_t n = (static_cast<uint32_t>(data[0]) << 24) |
                     (static_cast<uint32_t>(data[1]) << 16) |
                     (static_cast<uint32_t>(data[2]) << 8) | static_cast<uint32_t>(data[3]);
  if (len < 4 + static_cast<size_t>(n)) {
    throw TruncatedFrameError("frame payload truncated: header claims " + std::to_string(n) +
                              " bytes, got " + std::to_string(len - 4));
  }
  json j;
  try {
    j = json::parse(data + 4, data + 4 + n);
  } catch (const json::parse_error& e) {
    throw MissingFieldError(std::string("frame payload is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MissingFieldError("frame payload must be a JSON object");

  const std::string type = require_string(j, "type");
  Message m;
  if (type == "register") {
    m = Message::make_register(require_string(j, "robot"), require_string(j, "spec"));
  } else if (type == "plan") {
    m.type = MsgType::kPlan;
    m.robot = require_string(j, "robot");
    const auto& vps = require(j, "viewpoints");
    if (!vps.is_array()) throw MissingFieldError("field 'viewpoints' must be an array");
    for (const auto& v : vps) m.viewpoints.push_back(pose_from_json(v, "viewpoints"));
  } else if (type == "update") {
    m = Message::make_update(require_string(j, "robot"), require_int(j, "tick"),
                             pose_from_json(require(j, "believed_pose"), "believed_pose"),
                             pose_from_json(require(j, "lidar_footprint_pose"),
                                            "lidar_footprint_pose"),
                             pose_from_json(require(j, "camera_footprint_pose"),
                                            "camera_footprint_pose"));
  } else if (type == "ack") {
    m = Message::make_ack(require_int(j, "tick"));
  } else if (type == "done") {
    m = Message::make_done(require_string(j, "robot"));
  } else {
    throw UnknownTypeError("unknown message type: '" + type + "'");
  }
  if (consumed) *consumed = 4 + static_cast<size_t>(n);
  return m;
}

Message decode_message(const std::vector<uint8_t>& buf, size_t* consumed) {
  return decode_message(buf.data(), buf.size(), consumed);
}

}  // namespace live
