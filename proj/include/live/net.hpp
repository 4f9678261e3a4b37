#pragma once

#include <functional>
#include <string>

#include "live/simulator.hpp"

namespace live {

// Coordination server. Binds `listen_addr` ("host:port"; port 0 picks a
// free one, reported through on_listening), accepts one connection per
// scenario robot, serves each its plan, then drives the trial in lockstep:
// every Update is validated against the server's own replica before its
// footprints are applied, and each tick is acknowledged to all clients.
// Any disconnect, timeout or divergent message raises ProtocolError.
TrialResult serve_trial(const Scenario& sc, const std::string& listen_addr,
                        const std::function<void(int port)>& on_listening = nullptr);

// Robot client for `robot_name`. Registers, cross-checks the served plan
// against its own deterministic replica, then replicates the whole trial,
// sending this robot's Updates and pacing on the server's Acks.
TrialResult client_trial(const Scenario& sc, const std::string& robot_name,
                         const std::string& connect_addr);

}  // namespace live
