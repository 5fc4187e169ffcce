#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "loco/error.hpp"
#include "loco/host_service.hpp"

namespace loco {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using asio::ip::tcp;
using asio::ip::udp;

namespace {

class WsSession;

using Text = std::shared_ptr<const std::string>;

struct Inbound {
  std::weak_ptr<WsSession> from;
  Command command;
};

struct Outbound {
  std::weak_ptr<WsSession> to;  // expired/empty = broadcast
  bool broadcast = true;
  Text text;
};

// All members are touched only from the I/O thread.
class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  using OnMessage = std::function<void(std::shared_ptr<WsSession>, std::string)>;
  using OnClose = std::function<void(std::shared_ptr<WsSession>)>;

  WsSession(tcp::socket socket, OnMessage on_message, OnClose on_close)
      : ws_(std::move(socket)), on_message_(std::move(on_message)), on_close_(std::move(on_close)) {}

  void run(Text hello) {
    ws_.text(true);
    ws_.async_accept([self = shared_from_this(), hello](beast::error_code ec) {
      if (ec) return self->close();
      self->open_ = true;
      self->send(hello);
      self->read();
    });
  }

  void send(Text text) {
    if (!open_) return;
    // Slow clients lose old snapshots rather than growing the queue.
    if (outbox_.size() > 64) outbox_.erase(outbox_.begin() + 1, outbox_.end() - 32);
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_message_(self, std::move(text));
      self->read();
    });
  }

  void write() {
    ws_.async_write(asio::buffer(*outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->close();
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->write();
                    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    open_ = false;
    on_close_(shared_from_this());
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  std::deque<Text> outbox_;
  OnMessage on_message_;
  OnClose on_close_;
  bool open_ = false;
  bool closed_ = false;
};

Text make_text(std::string s) { return std::make_shared<const std::string>(std::move(s)); }

}  // namespace

struct LiveServer::Impl {
  SessionConfig config;
  std::shared_ptr<const CityMap> map;
  ControlConfig control;

  asio::io_context io;
  std::optional<udp::socket> udp_socket;
  tcp::acceptor acceptor{io};
  std::array<std::uint8_t, 64> datagram{};
  udp::endpoint sender;
  std::set<std::shared_ptr<WsSession>> clients;  // I/O thread only

  MessageQueue<EncoderFrame> frames;
  MessageQueue<Inbound> commands;
  MessageQueue<Outbound> outbound;

  std::atomic<RunState> published_state{RunState::Idle};
  std::atomic<std::uint64_t> datagrams{0};
  std::atomic<std::uint64_t> datagrams_bad{0};
  std::atomic<bool> stop_requested{false};

  std::mutex done_mutex;
  std::condition_variable done_cv;
  bool done = false;

  ExitReport report;
  std::jthread io_thread;
  std::jthread tick_thread;
  bool started = false;
  bool finalized = false;

  explicit Impl(SessionConfig cfg) : config(std::move(cfg)) {
    apply_env_overrides(config);
    config.validate();
    try {
      map = std::make_shared<const CityMap>(config.map_path.empty() ? default_city_map()
                                                                    : load_map(config.map_path));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::FileNotFound) throw;
      throw Error(ErrorKind::MalformedConfig, std::string("map: ") + e.what());
    }
    if (!config.params_path.empty()) control = load_control_config(config.params_path);
    bind();
  }

  void bind() {
    beast::error_code ec;
    if (const auto* u = std::get_if<UdpInput>(&config.input)) {
      udp_socket.emplace(io);
      udp_socket->open(udp::v4(), ec);
      if (!ec) udp_socket->bind({asio::ip::address_v4::any(), u->port}, ec);
      if (ec)
        throw Error(ErrorKind::PortInUse,
                    "cannot bind UDP port " + std::to_string(u->port) + ": " + ec.message());
    }
    const tcp::endpoint ep{asio::ip::address_v4::any(), config.ws_port};
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec)
      throw Error(ErrorKind::PortInUse,
                  "cannot bind WebSocket port " + std::to_string(config.ws_port) + ": " + ec.message());
  }

  // ---- I/O thread ----

  void receive() {
    udp_socket->async_receive_from(asio::buffer(datagram), sender,
                                   [this](beast::error_code ec, std::size_t n) {
                                     if (ec == asio::error::operation_aborted) return;
                                     if (!ec) {
                                       ++datagrams;
                                       const auto r = decode_frame(std::span(datagram.data(), n));
                                       if (const auto* f = std::get_if<EncoderFrame>(&r)) frames.push(*f);
                                       else ++datagrams_bad;
                                     }
                                     receive();
                                   });
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec == asio::error::operation_aborted) return;
      if (!ec) {
        auto session = std::make_shared<WsSession>(
            std::move(socket),
            [this](std::shared_ptr<WsSession> from, std::string text) { on_message(from, text); },
            [this](std::shared_ptr<WsSession> s) { clients.erase(s); });
        clients.insert(session);
        session->run(make_text(hello_to_json(*map, config, published_state.load())));
      }
      accept();
    });
  }

  void on_message(const std::shared_ptr<WsSession>& from, const std::string& text) {
    try {
      commands.push({from, parse_command(text)});
    } catch (const Error& e) {
      CommandReply r;
      r.ok = false;
      r.error = "invalid-command";
      r.message = e.what();
      from->send(make_text(reply_to_json(r, published_state.load())));
    }
  }

  void flush_outbound() {
    for (auto& msg : outbound.drain()) {
      if (msg.broadcast) {
        for (const auto& c : clients) c->send(msg.text);
      } else if (auto target = msg.to.lock()) {
        target->send(msg.text);
      }
    }
  }

  // ---- tick thread ----

  void publish(Outbound msg) {
    outbound.push(std::move(msg));
    asio::post(io, [this] { flush_outbound(); });
  }

  void broadcast(std::string text) { publish({{}, true, make_text(std::move(text))}); }

  void tick_loop(std::stop_token stop) {
    SessionController controller(map, control, config);
    if (config.autostart) {
      Command start;
      start.cmd = "start";
      controller.handle_command(start);
    }
    published_state = controller.state();

    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / kTickRateHz / config.speedup));
    const double dt = 1.0 / kTickRateHz;
    const double snapshot_every = kTickRateHz / config.snapshot_rate_hz;
    double snapshot_due = 0.0;
    std::uint64_t tick_count = 0;
    double max_ms = 0.0;
    auto next = clock::now();

    while (!stop.stop_requested() && !controller.done()) {
      const auto t0 = clock::now();
      for (auto& in : commands.drain()) {
        auto reply = controller.handle_command(in.command);
        published_state = controller.state();
        publish({in.from, false, make_text(reply_to_json(reply, controller.state()))});
      }
      for (const auto& e : controller.take_events())
        broadcast(event_to_json(e, controller.pipeline().clock()));

      auto batch = frames.drain();
      controller.feed_frames(batch);

      if (auto result = controller.tick(dt)) {
        ++tick_count;
        for (const auto& e : result->events)
          broadcast(event_to_json(e, result->snapshot.wall_time_s));
        snapshot_due -= 1.0;
        if (snapshot_due <= 0.0) {
          broadcast(snapshot_to_json(result->snapshot, controller.state()));
          snapshot_due += snapshot_every;
        }
      }
      published_state = controller.state();
      max_ms = std::max(max_ms, std::chrono::duration<double, std::milli>(clock::now() - t0).count());

      next += period;
      const auto now = clock::now();
      if (next < now - 5 * period) next = now;  // fell far behind; do not burst
      std::this_thread::sleep_until(next);
    }

    // Final state for late-joining clients.
    broadcast(snapshot_to_json(controller.pipeline().snapshot(), controller.state()));

    report.final_state = controller.state();
    report.logs = controller.logs();
    report.ticks = tick_count;
    report.max_tick_compute_ms = max_ms;
    report.frames_rejected = controller.frames_rejected();
    {
      std::lock_guard lock(done_mutex);
      done = true;
    }
    done_cv.notify_all();
  }

  void start() {
    if (started) return;
    started = true;
    if (udp_socket) receive();
    accept();
    io_thread = std::jthread([this] {
      auto guard = asio::make_work_guard(io);
      io.run();
    });
    tick_thread = std::jthread([this](std::stop_token st) { tick_loop(st); });
  }

  ExitReport finish() {
    if (finalized) return report;
    finalized = true;
    if (tick_thread.joinable()) {
      tick_thread.request_stop();
      tick_thread.join();
    }
    // Let the last messages go out before tearing the sockets down.
    asio::post(io, [this] {
      flush_outbound();
      beast::error_code ec;
      acceptor.close(ec);
      if (udp_socket) udp_socket->close(ec);
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    io.stop();
    if (io_thread.joinable()) io_thread.join();

    report.out_dir = config.out_dir;
    report.frames_received = datagrams.load();
    report.frames_rejected += datagrams_bad.load();
    if (!report.logs.empty()) write_trial_logs(config.out_dir, report.logs);
    return report;
  }
};

LiveServer::LiveServer(SessionConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

LiveServer::~LiveServer() {
  if (impl_ && impl_->started) {
    try {
      impl_->finish();
    } catch (...) {
    }
  }
}

std::uint16_t LiveServer::udp_port() const noexcept {
  if (!impl_->udp_socket) return 0;
  beast::error_code ec;
  return impl_->udp_socket->local_endpoint(ec).port();
}

std::uint16_t LiveServer::ws_port() const noexcept {
  beast::error_code ec;
  return impl_->acceptor.local_endpoint(ec).port();
}

void LiveServer::start() { impl_->start(); }

ExitReport LiveServer::wait() {
  {
    std::unique_lock lock(impl_->done_mutex);
    impl_->done_cv.wait(lock, [&] { return impl_->done || impl_->stop_requested.load(); });
  }
  return impl_->finish();
}

void LiveServer::stop() {
  impl_->stop_requested = true;
  if (impl_->tick_thread.joinable()) impl_->tick_thread.request_stop();
  impl_->done_cv.notify_all();
}

ExitReport run_session(const SessionConfig& config) {
  LiveServer server(config);
  server.start();
  return server.wait();
}

}  // namespace loco
