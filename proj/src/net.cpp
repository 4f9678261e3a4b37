#include "live/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <json.hpp>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "live/protocol.hpp"

namespace live {

namespace {

using nlohmann::json;

constexpr int kIoTimeoutSec = 60;

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd(o.fd) { o.fd = -1; }
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd = o.fd;
      o.fd = -1;
    }
    return *this;
  }
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  explicit operator bool() const { return fd >= 0; }
};

[[noreturn]] void sys_fail(const std::string& what) {
  throw ProtocolError(what + ": " + std::strerror(errno));
}

std::pair<std::string, uint16_t> split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
    throw std::invalid_argument("address must be host:port, got '" + addr + "'");
  }
  const std::string host = addr.substr(0, colon);
  const std::string port_s = addr.substr(colon + 1);
  char* end = nullptr;
  const long port = std::strtol(port_s.c_str(), &end, 10);
  if (*end != '\0' || port < 0 || port > 65535) {
    throw std::invalid_argument("bad port in address '" + addr + "'");
  }
  return {host, static_cast<uint16_t>(port)};
}

sockaddr_in resolve(const std::string& host, uint16_t port) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (host == "localhost") {
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  } else if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    throw std::invalid_argument("cannot parse IPv4 host '" + host + "'");
  }
  return sa;
}

void set_timeouts(int fd) {
  timeval tv{};
  tv.tv_sec = kIoTimeoutSec;
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  const int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void write_all(int fd, const uint8_t* data, size_t len) {
  size_t off = 0;
  while (off < len) {
    const ssize_t n = ::send(fd, data + off, len - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("send failed");
    }
    off += static_cast<size_t>(n);
  }
}

// False on clean EOF at a frame boundary (offset 0 of the first read).
bool read_exact(int fd, uint8_t* data, size_t len) {
  size_t off = 0;
  while (off < len) {
    const ssize_t n = ::recv(fd, data + off, len - off, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("recv failed");
    }
    if (n == 0) {
      if (off == 0) return false;
      throw TruncatedFrameError("peer closed mid-frame");
    }
    off += static_cast<size_t>(n);
  }
  return true;
}

void send_message(int fd, const Message& msg) {
  const auto bytes = encode_message(msg);
  write_all(fd, bytes.data(), bytes.size());
}

Message recv_message(int fd) {
  uint8_t hdr[4];
  if (!read_exact(fd, hdr, 4)) throw ProtocolError("peer disconnected");
  const uint32_t n = (static_cast<uint32_t>(hdr[0]) << 24) |
                     (static_cast<uint32_t>(hdr[1]) << 16) |
                     (static_cast<uint32_t>(hdr[2]) << 8) | static_cast<uint32_t>(hdr[3]);
  if (n > (1u << 26)) throw ProtocolError("frame too large: " + std::to_string(n) + " bytes");
  std::vector<uint8_t> buf(4 + n);
  std::memcpy(buf.data(), hdr, 4);
  if (n > 0 && !read_exact(fd, buf.data() + 4, n)) {
    throw TruncatedFrameError("peer closed mid-frame");
  }
  return decode_message(buf);
}

std::string robot_spec_json(const RobotSpec& r) {
  json j;
  j["name"] = r.name;
  j["start"] = {r.start.x, r.start.y, r.start.theta};
  j["speed"] = r.speed;
  j["turn_rate"] = r.turn_rate;
  j["radius"] = r.radius;
  return j.dump();
}

void check_spec_echo(const RobotSpec& expected, const std::string& spec_json) {
  json j;
  try {
    j = json::parse(spec_json);
  } catch (const json::parse_error&) {
    throw ProtocolError("register spec for '" + expected.name + "' is not valid JSON");
  }
  const bool ok = j.value("name", "") == expected.name &&
                  j.value("speed", -1.0) == expected.speed &&
                  j.value("turn_rate", -1.0) == expected.turn_rate &&
                  j.value("radius", -1.0) == expected.radius;
  if (!ok) {
    throw ProtocolError("robot '" + expected.name + "' registered with a spec that does not "
                        "match the scenario");
  }
}

bool pose_bits_equal(const Pose2& a, const Pose2& b) {
  return a.x == b.x && a.y == b.y && a.theta == b.theta;
}

int robot_index(const Scenario& sc, const std::string& name) {
  for (size_t i = 0; i < sc.robots.size(); ++i) {
    if (sc.robots[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

TrialResult serve_trial(const Scenario& sc, const std::string& listen_addr,
                        const std::function<void(int port)>& on_listening) {
  const auto [host, port] = split_addr(listen_addr);
  const int n_robots = static_cast<int>(sc.robots.size());

  Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (!listener) sys_fail("socket failed");
  const int one = 1;
  setsockopt(listener.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in sa = resolve(host, port);
  if (::bind(listener.fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    sys_fail("bind to " + listen_addr + " failed");
  }
  if (::listen(listener.fd, n_robots) != 0) sys_fail("listen failed");
  if (on_listening) {
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    if (getsockname(listener.fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
      sys_fail("getsockname failed");
    }
    on_listening(ntohs(bound.sin_port));
  }

  // One connection per robot, identified by its Register message.
  std::vector<Fd> conns(static_cast<size_t>(n_robots));
  for (int i = 0; i < n_robots; ++i) {
    Fd c(::accept(listener.fd, nullptr, nullptr));
    if (!c) sys_fail("accept failed");
    set_timeouts(c.fd);
    const Message reg = recv_message(c.fd);
    if (reg.type != MsgType::kRegister) {
      throw ProtocolError("expected register, got another message type");
    }
    const int idx = robot_index(sc, reg.robot);
    if (idx < 0) throw ProtocolError("register for unknown robot '" + reg.robot + "'");
    if (conns[static_cast<size_t>(idx)]) {
      throw ProtocolError("robot '" + reg.robot + "' registered twice");
    }
    check_spec_echo(sc.robots[static_cast<size_t>(idx)], reg.spec_json);
    conns[static_cast<size_t>(idx)] = std::move(c);
  }
  listener.reset();

  TrialSim sim(sc);
  for (int r = 0; r < n_robots; ++r) {
    send_message(conns[static_cast<size_t>(r)].fd,
                 Message::make_plan(sc.robots[static_cast<size_t>(r)].name,
                                    sim.plan().viewpoints[static_cast<size_t>(r)]));
  }

  while (!sim.finished()) {
    for (int r = 0; r < n_robots; ++r) {
      const TickUpdate expected = sim.step_robot_phase(r);
      const Message got = recv_message(conns[static_cast<size_t>(r)].fd);
      if (got.type != MsgType::kUpdate) {
        throw ProtocolError("expected update from '" + sc.robots[static_cast<size_t>(r)].name +
                            "', got another message type");
      }
      if (got.robot != sc.robots[static_cast<size_t>(r)].name) {
        throw ProtocolError("update out of turn: expected robot '" +
                            sc.robots[static_cast<size_t>(r)].name + "', got '" + got.robot +
                            "'");
      }
      if (got.tick != expected.tick) {
        throw ProtocolError("update tick mismatch for '" + got.robot + "': expected " +
                            std::to_string(expected.tick) + ", got " +
                            std::to_string(got.tick));
      }
      if (!pose_bits_equal(got.believed_pose, expected.believed_pose) ||
          !pose_bits_equal(got.lidar_fp_pose, expected.lidar_fp_pose) ||
          !pose_bits_equal(got.camera_fp_pose, expected.camera_fp_pose)) {
        throw ProtocolError("update diverged from the server replica for robot '" + got.robot +
                            "' at tick " + std::to_string(got.tick));
      }
      // Trust nothing implicit: the applied footprints come from the wire.
      TickUpdate applied;
      applied.robot = r;
      applied.tick = got.tick;
      applied.believed_pose = got.believed_pose;
      applied.lidar_fp_pose = got.lidar_fp_pose;
      applied.camera_fp_pose = got.camera_fp_pose;
      sim.apply_phase(applied);
    }
    const int acked = sim.current_tick();
    sim.end_tick();
    for (int r = 0; r < n_robots; ++r) {
      send_message(conns[static_cast<size_t>(r)].fd, Message::make_ack(acked));
    }
  }

  for (int r = 0; r < n_robots; ++r) {
    const Message done = recv_message(conns[static_cast<size_t>(r)].fd);
    if (done.type != MsgType::kDone || done.robot != sc.robots[static_cast<size_t>(r)].name) {
      throw ProtocolError("expected done from '" + sc.robots[static_cast<size_t>(r)].name + "'");
    }
  }
  for (int r = 0; r < n_robots; ++r) {
    send_message(conns[static_cast<size_t>(r)].fd,
                 Message::make_done(sc.robots[static_cast<size_t>(r)].name));
  }
  return sim.finish();
}

TrialResult client_trial(const Scenario& sc, const std::string& robot_name,
                         const std::string& connect_addr) {
  const int my_index = robot_index(sc, robot_name);
  if (my_index < 0) {
    throw std::invalid_argument("robot '" + robot_name + "' is not in the scenario");
  }
  const auto [host, port] = split_addr(connect_addr);

  Fd conn(::socket(AF_INET, SOCK_STREAM, 0));
  if (!conn) sys_fail("socket failed");
  set_timeouts(conn.fd);
  sockaddr_in sa = resolve(host, port);
  if (::connect(conn.fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    sys_fail("connect to " + connect_addr + " failed");
  }

  const auto& my_spec = sc.robots[static_cast<size_t>(my_index)];
  send_message(conn.fd, Message::make_register(robot_name, robot_spec_json(my_spec)));

  // Full deterministic replica; the wire only cross-checks and paces it.
  TrialSim sim(sc);

  const Message plan_msg = recv_message(conn.fd);
  if (plan_msg.type != MsgType::kPlan || plan_msg.robot != robot_name) {
    throw ProtocolError("expected this robot's plan after registering");
  }
  const auto& local_vps = sim.plan().viewpoints[static_cast<size_t>(my_index)];
  if (plan_msg.viewpoints.size() != local_vps.size()) {
    throw ProtocolError("served plan does not match the local replica");
  }
  for (size_t i = 0; i < local_vps.size(); ++i) {
    if (!pose_bits_equal(plan_msg.viewpoints[i], local_vps[i])) {
      throw ProtocolError("served plan does not match the local replica");
    }
  }

  while (!sim.finished()) {
    for (int r = 0; r < sim.robot_count(); ++r) {
      const TickUpdate upd = sim.step_robot_phase(r);
      if (r == my_index) {
        send_message(conn.fd,
                     Message::make_update(robot_name, upd.tick, upd.believed_pose,
                                          upd.lidar_fp_pose, upd.camera_fp_pose));
      }
      sim.apply_phase(upd);
    }
    const int tick = sim.current_tick();
    sim.end_tick();
    const Message ack = recv_message(conn.fd);
    if (ack.type != MsgType::kAck || ack.tick != tick) {
      throw ProtocolError("expected ack for tick " + std::to_string(tick));
    }
  }

  send_message(conn.fd, Message::make_done(robot_name));
  const Message done = recv_message(conn.fd);
  if (done.type != MsgType::kDone) throw ProtocolError("expected closing done from the server");
  return sim.finish();
}

}  // namespace live
