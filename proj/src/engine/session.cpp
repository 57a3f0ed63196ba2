// Copyright 2026 The retouch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "retouch/engine/session.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "retouch/errors.hpp"

namespace retouch::engine {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

json vec_json(const JointVec& v) { return json(v.v); }
json vec2_json(model::Vec2 v) { return json::array({v.x, v.y}); }

double finite_number(const json& j, const char* what) {
  if (!j.is_number()) throw ProtocolError(std::string(what) + " must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ProtocolError(std::string(what) + " must be finite");
  return x;
}

std::optional<std::int64_t> parse_id(const json& j) {
  if (!j.contains("id")) return std::nullopt;
  if (!j["id"].is_number_integer()) throw ProtocolError("id must be an integer");
  return j["id"].get<std::int64_t>();
}

json robot_json(const model::RobotState& s, const JointVec& tau_res, const model::RobotParams& p) {
  return {{"q", vec_json(s.q)},
          {"dq", vec_json(s.dq)},
          {"tau_res", vec_json(tau_res)},
          {"tip", vec2_json(model::forward_kinematics_planar(s.q, p))}};
}

}  // namespace

const char* to_string(ControlAction a) {
  switch (a) {
    case ControlAction::kStart: return "start";
    case ControlAction::kPause: return "pause";
    case ControlAction::kResume: return "resume";
    case ControlAction::kSave: return "save";
    case ControlAction::kQuit: return "quit";
    case ControlAction::kSetAlpha: return "set_alpha";
  }
  return "?";
}

ClientMessage parse_client_message(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw ProtocolError("message is not valid JSON");
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  if (j.contains("v") && j["v"] != kProtocolVersion) throw ProtocolError("unsupported protocol version");
  if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError("missing 'type'");
  const std::string type = j["type"].get<std::string>();

  if (type == "intervene") {
    InterveneMsg m;
    m.id = parse_id(j);
    const bool has_joint = j.contains("joint_torque");
    const bool has_planar = j.contains("planar_force");
    if (has_joint == has_planar)
      throw ProtocolError("intervene needs exactly one of joint_torque or planar_force");
    if (has_joint) {
      const json& a = j["joint_torque"];
      if (!a.is_array() || a.size() != kJoints) throw ProtocolError("joint_torque must have 8 numbers");
      JointVec tau;
      for (std::size_t i = 0; i < kJoints; ++i) tau[i] = finite_number(a[i], "joint_torque entry");
      m.joint_torque = tau;
    } else {
      const json& a = j["planar_force"];
      if (!a.is_array() || a.size() != 2) throw ProtocolError("planar_force must have 2 numbers");
      m.planar_force = model::Vec2{finite_number(a[0], "planar_force x"),
                                   finite_number(a[1], "planar_force y")};
    }
    if (j.contains("t")) m.t = finite_number(j["t"], "t");
    return m;
  }
  if (type == "control") {
    ControlMsg m;
    m.id = parse_id(j);
    if (!j.contains("action") || !j["action"].is_string()) throw ProtocolError("control needs 'action'");
    const std::string action = j["action"].get<std::string>();
    if (action == "start") {
      m.action = ControlAction::kStart;
    } else if (action == "pause") {
      m.action = ControlAction::kPause;
    } else if (action == "resume") {
      m.action = ControlAction::kResume;
    } else if (action == "save") {
      m.action = ControlAction::kSave;
      if (j.contains("path")) {
        if (!j["path"].is_string()) throw ProtocolError("path must be a string");
        m.path = j["path"].get<std::string>();
      }
    } else if (action == "quit") {
      m.action = ControlAction::kQuit;
    } else if (action == "set_alpha") {
      m.action = ControlAction::kSetAlpha;
      if (!j.contains("value")) throw ProtocolError("set_alpha needs 'value'");
      m.value = finite_number(j["value"], "value");
      if (m.value < 0.0 || m.value > 1.0) throw ProtocolError("alpha must lie in [0, 1]");
    } else {
      throw ProtocolError("unknown control action '" + action + "'");
    }
    return m;
  }
  if (type == "state" || type == "ack" || type == "error")
    throw ProtocolError("'" + type + "' is sent by the engine only");
  throw ProtocolError("unknown message type '" + type + "'");
}

std::string state_message(const LoopSnapshot& s, const model::RobotParams& p,
                          const StateExtras& extras, const SceneInfo* scene) {
  json j = {
      {"type", "state"},
      {"v", kProtocolVersion},
      {"step", s.step},
      {"t", s.t},
      {"leader",
       {{"q", vec_json(s.leader.q_cmd)},
        {"dq", vec_json(s.leader.dq_cmd)},
        {"tau", vec_json(s.leader.tau_cmd)},
        {"tip", vec2_json(model::forward_kinematics_planar(s.leader.q_cmd, p))}}},
      {"follower", robot_json(s.follower, s.follower_tau_res_hat, p)},
      {"editor", robot_json(s.editor, s.editor_tau_res_hat, p)},
      {"intervention", vec_json(s.intervention)},
      {"contact",
       {{"in_contact", s.contact.in_contact},
        {"lateral_force", s.contact.lateral_force},
        {"depth", s.contact.depth},
        {"tube_held", s.contact.tube_held},
        {"grip_torque", s.contact.grip_torque},
        {"force", vec2_json(s.contact.force)}}},
      {"tube", {{"where", model::to_string(s.tube.where)}, {"bottom", vec2_json(s.tube.bottom)}}},
      {"config",
       {{"alpha", s.alpha},
        {"decimation", extras.decimation},
        {"paused", extras.paused},
        {"done", extras.done}}},
      {"stats", {{"stale_dropped", extras.stale_dropped}, {"rejected", extras.rejected}}},
  };
  if (scene) {
    const model::PegTaskEnv& e = scene->env;
    j["scene"] = {{"dt", scene->dt},
                  {"total_steps", scene->total_steps},
                  {"source_hole", vec2_json(e.source_hole)},
                  {"target_hole", vec2_json(e.target_hole)},
                  {"hole_clearance", e.hole_clearance},
                  {"hole_chamfer", e.hole_chamfer},
                  {"hole_depth", e.hole_depth},
                  {"rack_half_width", e.rack_half_width},
                  {"insertion_depth_goal", e.insertion_depth_goal},
                  {"links", json::array({scene->params.l24, scene->params.l_distal()})},
                  {"intervention_limit", kInterventionLimit}};
  }
  return j.dump();
}

std::string ack_message(std::string_view of, std::optional<std::int64_t> id, std::int64_t step,
                        const std::string& detail_key, const std::string& detail) {
  json j = {{"type", "ack"}, {"v", kProtocolVersion}, {"of", of}, {"step", step}};
  if (id) j["id"] = *id;
  if (!detail_key.empty()) j[detail_key] = detail;
  return j.dump();
}

std::string error_message(std::string_view reason, std::optional<std::int64_t> id) {
  json j = {{"type", "error"}, {"v", kProtocolVersion}, {"reason", reason}};
  if (id) j["id"] = *id;
  return j.dump();
}

std::filesystem::path save_retouch(const tape::Tape& tape, const InterventionProfile& timeline,
                                   const std::filesystem::path& tape_path) {
  std::filesystem::path int_path = tape_path;
  int_path.replace_extension(".int");
  tape::save_tape(tape, tape_path);
  save_intervention(timeline, int_path);
  return int_path;
}

// ---------------------------------------------------------------------------

struct Session::Impl {
  struct Connected {};
  struct Disconnected {};
  using Event = std::variant<ClientMessage, Connected, Disconnected>;
  using Socket = websocket::stream<tcp::socket>;

  Impl(const tape::Tape& tape, const Scenario& sc, const InterventionProfile& scripted,
       SessionOptions o)
      : sc(sc), opt(std::move(o)), loop(tape, sc, scripted), acceptor(ioc) {
    if (opt.decimation < 1) throw ConfigError("decimation must be >= 1");
    if (opt.queue_capacity < 1) throw ConfigError("queue capacity must be >= 1");
    const tcp::endpoint ep(net::ip::make_address(opt.address), opt.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
    port = acceptor.local_endpoint().port();
    do_accept();
    net_thread = std::thread([this] { ioc.run(); });
  }

  ~Impl() {
    net::post(ioc, [this] { begin_close(); });
    {
      std::unique_lock lk(closed_mu);
      closed_cv.wait_for(lk, std::chrono::seconds(1), [this] { return closed; });
    }
    ioc.stop();
    net_thread.join();
  }

  // --- network thread -----------------------------------------------------

  void do_accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket sock) {
      if (ec) return;
      auto ws = std::make_shared<Socket>(std::move(sock));
      ws->async_accept([this, ws](beast::error_code ec2) {
        if (ec2) return;
        ws->text(true);
        if (client || closing) {
          auto msg = std::make_shared<std::string>(error_message("session busy"));
          ws->async_write(net::buffer(*msg), [ws, msg](beast::error_code, std::size_t) {
            ws->async_close(websocket::close_code::try_again_later, [ws](beast::error_code) {});
          });
          return;
        }
        client = ws;
        push_event(Connected{}, true);
        do_read(ws);
      });
      do_accept();
    });
  }

  void do_read(const std::shared_ptr<Socket>& ws) {
    auto buf = std::make_shared<beast::flat_buffer>();
    ws->async_read(*buf, [this, ws, buf](beast::error_code ec, std::size_t) {
      if (ec) {
        if (client == ws) {
          client.reset();
          outq.clear();
          push_event(Disconnected{}, true);
        }
        return;
      }
      const std::string text = beast::buffers_to_string(buf->data());
      try {
        if (!push_event(parse_client_message(text), false)) {
          ++rejected;
          enqueue(error_message("inbound queue full"));
        }
      } catch (const ProtocolError& e) {
        ++rejected;
        enqueue(error_message(e.what()));
      }
      do_read(ws);
    });
  }

  void enqueue(std::string msg) {
    if (!client) return;
    if (outq.size() >= opt.queue_capacity) outq.pop_front();
    outq.push_back(std::move(msg));
    if (!writing) do_write();
  }

  void do_write() {
    if (!client || outq.empty()) {
      writing = false;
      if (closing) finish_close();
      return;
    }
    writing = true;
    auto msg = std::make_shared<std::string>(std::move(outq.front()));
    outq.pop_front();
    client->async_write(net::buffer(*msg), [this, msg](beast::error_code ec, std::size_t) {
      writing = false;
      if (ec) {
        outq.clear();
        if (closing) finish_close();
        return;
      }
      do_write();
    });
  }

  void begin_close() {
    closing = true;
    beast::error_code ignored;
    acceptor.close(ignored);
    if (!writing) finish_close();
  }

  void finish_close() {
    auto mark = [this] {
      std::lock_guard lk(closed_mu);
      closed = true;
      closed_cv.notify_all();
    };
    if (!client) {
      mark();
      return;
    }
    auto ws = std::move(client);
    ws->async_close(websocket::close_code::normal, [ws, mark](beast::error_code) { mark(); });
  }

  // --- shared -------------------------------------------------------------

  /// Connection events always go through; messages respect the capacity.
  bool push_event(Event ev, bool always) {
    std::lock_guard lk(in_mu);
    if (!always && inq.size() >= opt.queue_capacity) return false;
    inq.push_back(std::move(ev));
    return true;
  }

  std::deque<Event> drain() {
    std::lock_guard lk(in_mu);
    return std::exchange(inq, {});
  }

  /// Called from the loop thread.
  void send(std::string msg) {
    net::post(ioc, [this, m = std::move(msg)]() mutable { enqueue(std::move(m)); });
  }

  // --- loop thread --------------------------------------------------------

  StateExtras extras(bool done) const {
    StateExtras x;
    x.paused = paused;
    x.done = done;
    x.decimation = opt.decimation;
    x.stale_dropped = stats.stale_dropped;
    x.rejected = rejected.load();
    return x;
  }

  void send_state(bool with_scene) {
    const SceneInfo scene{sc.env, sc.params, sc.dt, loop.total_steps()};
    send(state_message(loop.snapshot(), sc.params, extras(loop.done()), with_scene ? &scene : nullptr));
    ++stats.snapshots;
  }

  void handle(const InterveneMsg& m) {
    const double now = static_cast<double>(loop.step()) * sc.dt;
    if (m.t && now - *m.t > opt.stale_after) {
      ++stats.stale_dropped;
      send(error_message("stale intervention dropped", m.id));
      return;
    }
    JointVec tau = m.joint_torque ? *m.joint_torque
                                  : model::planar_force_to_torque(loop.snapshot().editor.q,
                                                                  *m.planar_force, sc.params);
    live = clamp_intervention(tau);
    ++stats.interventions;
    send(ack_message("intervene", m.id, loop.step()));
  }

  void handle(const ControlMsg& m) {
    switch (m.action) {
      case ControlAction::kStart:
      case ControlAction::kResume:
        paused = false;
        next_tick = std::chrono::steady_clock::now();
        break;
      case ControlAction::kPause:
        paused = true;
        break;
      case ControlAction::kSetAlpha:
        loop.set_alpha(m.value);
        break;
      case ControlAction::kSave: {
        const std::filesystem::path path = m.path.empty() ? opt.save_path : std::filesystem::path(m.path);
        try {
          save_retouch(loop.recorded(), loop.timeline(), path);
        } catch (const std::exception& e) {
          send(error_message(std::string("save failed: ") + e.what(), m.id));
          return;
        }
        ++stats.saves;
        send(ack_message("save", m.id, loop.step(), "path", path.string()));
        return;
      }
      case ControlAction::kQuit:
        quit = true;
        break;
    }
    send(ack_message(to_string(m.action), m.id, loop.step()));
  }

  RetouchResult run() {
    paused = opt.start_paused;
    next_tick = std::chrono::steady_clock::now();
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(sc.dt));
    bool announced_done = false;
    while (!stop_requested.load()) {
      for (Event& ev : drain()) {
        if (std::holds_alternative<Connected>(ev)) {
          connected = true;
          send_state(true);
        } else if (std::holds_alternative<Disconnected>(ev)) {
          connected = false;
          live = JointVec{};
        } else {
          std::visit([this](const auto& m) { handle(m); }, std::get<ClientMessage>(ev));
        }
      }
      if (quit) break;
      if (loop.done()) {
        if (!announced_done && connected) {
          send_state(false);
          announced_done = true;
        }
        if (!opt.linger || !connected) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        continue;
      }
      if (paused) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        continue;
      }
      loop.tick(live);
      if (connected && loop.step() % opt.decimation == 0) send_state(false);
      if (opt.realtime) {
        next_tick += period;
        std::this_thread::sleep_until(next_tick);
      }
    }
    return std::move(loop).finish();
  }

  Scenario sc;
  SessionOptions opt;
  RetouchLoop loop;

  // loop thread only
  JointVec live;
  bool paused = false;
  bool connected = false;
  bool quit = false;
  std::chrono::steady_clock::time_point next_tick;
  SessionStats stats;

  // shared
  std::atomic<bool> stop_requested{false};
  std::atomic<std::int64_t> rejected{0};
  std::mutex in_mu;
  std::deque<Event> inq;
  std::mutex closed_mu;
  std::condition_variable closed_cv;
  bool closed = false;

  // network thread only
  net::io_context ioc;
  tcp::acceptor acceptor;
  unsigned short port = 0;
  std::shared_ptr<Socket> client;
  std::deque<std::string> outq;
  bool writing = false;
  bool closing = false;
  std::thread net_thread;
};

Session::Session(const tape::Tape& tape, const Scenario& sc, const InterventionProfile& scripted,
                 SessionOptions opt)
    : impl_(std::make_unique<Impl>(tape, sc, scripted, std::move(opt))) {}

Session::~Session() = default;

unsigned short Session::port() const { return impl_->port; }

RetouchResult Session::run() { return impl_->run(); }

void Session::stop() { impl_->stop_requested = true; }

SessionStats Session::stats() const {
  SessionStats s = impl_->stats;
  s.rejected = impl_->rejected.load();
  return s;
}

}  // namespace retouch::engine
