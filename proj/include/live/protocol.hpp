#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "live/geometry.hpp"

namespace live {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Frame shorter than its length prefix claims (or a truncated prefix).
struct TruncatedFrameError : ProtocolError {
  using ProtocolError::ProtocolError;
};

// Well-formed frame whose "type" is not part of the protocol.
struct UnknownTypeError : ProtocolError {
  using ProtocolError::ProtocolError;
};

// Known type with a required field missing or of the wrong shape.
struct MissingFieldError : ProtocolError {
  using ProtocolError::ProtocolError;
};

enum class MsgType { kRegister, kPlan, kUpdate, kAck, kDone };

// One coordination message. Fields are populated according to type:
//   Register: robot, spec_json      Plan: robot, viewpoints
//   Update:   robot, tick, believed_pose, lidar_fp_pose, camera_fp_pose
//   Ack:      tick                  Done: robot
struct Message {
  MsgType type = MsgType::kAck;
  std::string robot;
  std::string spec_json;  // opaque robot spec echo, Register only
  std::vector<Pose2> viewpoints;
  int tick = 0;
  Pose2 believed_pose;
  Pose2 lidar_fp_pose;
  Pose2 camera_fp_pose;

  static Message make_register(std::string robot, std::string spec_json);
  static Message make_plan(std::string robot, std::vector<Pose2> viewpoints);
  static Message make_update(std::string robot, int tick, const Pose2& believed,
                             const Pose2& lidar_fp, const Pose2& camera_fp);
  static Message make_ack(int tick);
  static Message make_done(std::string robot);

  bool operator==(const Message& o) const;
};

// 4-byte big-endian payload length, then a UTF-8 JSON object carrying
// "type" plus the type's fields.
std::vector<uint8_t> encode_message(const Message& msg);

// Decodes one complete frame. Throws TruncatedFrameError /
// UnknownTypeError / MissingFieldError; `consumed` (optional) receives the
// frame's total byte length.
Message decode_message(const uint8_t* data, size_t len, size_t* consumed = nullptr);
Message decode_message(const std::vector<uint8_t>& buf, size_t* consumed = nullptr);

}  // namespace live
