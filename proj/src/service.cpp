#include "dronecine/service.hpp"

#include "dronecine/scenario_io.hpp"
#include "dronecine/wire.hpp"

#include "json.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <future>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace dronecine {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// Frames queued for one slow client before new ones are dropped.
constexpr std::size_t kMaxQueuedFrames = 256;

constexpr const char* kStatusPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>dronecine</title></head>
<body>
<h1>dronecine live service</h1>
<p>No UI bundle is configured. Endpoints:</p>
<ul>
<li><code>GET /scenarios</code>: scenario names</li>
<li><code>GET /scenarios/&lt;name&gt;</code>: scenario document</li>
<li><code>/ws</code>: WebSocket telemetry and commands</li>
</ul>
</body></html>
)";

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string mime_type(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".map") return "application/json";
    return "application/octet-stream";
}

// Request path without query, or nullopt when it could leave the root.
std::optional<std::string> clean_target(boost::beast::string_view raw) {
    const std::string_view target(raw.data(), raw.size());
    const auto q = target.find('?');
    std::string path(target.substr(0, q));
    if (path.empty() || path.front() != '/') return std::nullopt;
    if (path.find("..") != std::string::npos || path.find('\\') != std::string::npos) return std::nullopt;
    return path;
}

}  // namespace

class WsSession;

struct ServiceState {
    ServiceState(Scenario scenario, SimulationConfig config, ServiceOptions opts)
        : sim(std::move(scenario), std::move(config)), options(std::move(opts)), acceptor(ioc) {}

    void accept();
    void run_simulation();
    void broadcast(std::string frame, bool is_state);
    void reply(const std::weak_ptr<WsSession>& to, std::string frame);
    void enqueue(std::string text, std::weak_ptr<WsSession> from);
    void load_script(const std::string& path);
    http::response<http::string_body> respond(const http::request<http::string_body>& req) const;

    Simulation sim;  // worker thread only once started
    ServiceOptions options;
    net::io_context ioc;
    tcp::acceptor acceptor;

    // io thread only
    std::set<std::shared_ptr<WsSession>> sessions;
    std::shared_ptr<const std::string> latest_state;

    std::mutex mutex;
    std::condition_variable wake;
    bool stopping = false;
    bool started = false;
    std::deque<std::pair<std::string, std::weak_ptr<WsSession>>> commands;

    std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
    std::thread io_thread;
    std::thread sim_thread;
};

struct LiveService::Impl : ServiceState {
    using ServiceState::ServiceState;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, ServiceState& service) : ws_(std::move(socket)), service_(service) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->service_.sessions.insert(self);
            if (self->service_.latest_state) self->send(self->service_.latest_state);
            self->read();
        });
    }

    void send(std::shared_ptr<const std::string> frame) {
        if (closed_ || queue_.size() >= kMaxQueuedFrames) return;
        queue_.push_back(std::move(frame));
        if (queue_.size() == 1) write();
    }

    void close() {
        closed_ = true;
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().close(ec);
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->drop();
                return;
            }
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            try {
                self->service_.enqueue(parse_command_frame(text), self);
            } catch (const WireError& e) {
                self->send(std::make_shared<const std::string>(protocol_error_frame(e.what())));
            }
            self->read();
        });
    }

    void write() {
        ws_.async_write(net::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->drop();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write();
        });
    }

    void drop() {
        closed_ = true;
        queue_.clear();
        service_.sessions.erase(shared_from_this());
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    ServiceState& service_;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket socket, ServiceState& service) : stream_(std::move(socket)), service_(service) {}

    void run() { read(); }

private:
    void read() {
        request_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->shutdown();
                return;
            }
            self->handle();
        });
    }

    void handle() {
        if (websocket::is_upgrade(request_) && clean_target(request_.target()) == "/ws") {
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), service_)->run(std::move(request_));
            return;
        }
        auto res = std::make_shared<http::response<http::string_body>>(service_.respond(request_));
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec || res->need_eof()) {
                self->shutdown();
                return;
            }
            self->read();
        });
    }

    void shutdown() {
        beast::error_code ec;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
    ServiceState& service_;
};

void ServiceState::accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;  // closed on stop
        std::make_shared<HttpSession>(std::move(socket), *this)->run();
        accept();
    });
}

void ServiceState::broadcast(std::string frame, bool is_state) {
    auto msg = std::make_shared<const std::string>(std::move(frame));
    net::post(ioc, [this, msg, is_state] {
        if (is_state) latest_state = msg;
        for (const auto& s : sessions) s->send(msg);
    });
}

void ServiceState::reply(const std::weak_ptr<WsSession>& to, std::string frame) {
    auto msg = std::make_shared<const std::string>(std::move(frame));
    net::post(ioc, [to, msg] {
        if (auto s = to.lock()) s->send(msg);
    });
}

void ServiceState::enqueue(std::string text, std::weak_ptr<WsSession> from) {
    // Picked up at the start of the next tick.
    std::lock_guard lock(mutex);
    commands.emplace_back(std::move(text), std::move(from));
}

void ServiceState::load_script(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative() && !options.scenario_dir.empty()) {
        const auto in_dir = options.scenario_dir / p;
        p = std::filesystem::exists(in_dir) || in_dir.has_extension() ? in_dir
                                                                       : std::filesystem::path(in_dir.string() + ".json");
    }
    CommandReport r;
    r.time = sim.time();
    r.text = "load " + path;
    try {
        const Scenario script = load_scenario(p);
        sim.schedule(script.commands);
        r.accepted = true;
        r.detail = "scheduled " + std::to_string(script.commands.size()) + " commands from " + p.string();
    } catch (const std::exception& e) {
        r.detail = e.what();
    }
    broadcast(reply_frame(r), false);
}

void ServiceState::run_simulation() {
    using clock = std::chrono::steady_clock;
    const double dt = sim.config().model.dt;
    const auto ticks_per_state =
        std::max<std::int64_t>(1, std::llround(1.0 / (dt * std::max(options.state_rate, 1e-3))));
    const auto period = std::chrono::duration<double>(dt / options.speed);
    const auto start = clock::now();

    for (std::int64_t k = 0;; ++k) {
        std::deque<std::pair<std::string, std::weak_ptr<WsSession>>> pending;
        {
            std::unique_lock lock(mutex);
            const auto due = start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(k));
            wake.wait_until(lock, due, [&] { return stopping; });
            if (stopping) return;
            pending.swap(commands);
        }
        for (auto& [text, from] : pending) reply(from, reply_frame(sim.submit(text)));
        for (const auto& path : sim.take_script_requests()) load_script(path);

        const LogRecord& rec = sim.step();
        for (const auto& r : sim.take_reports()) broadcast(reply_frame(r), false);
        for (const auto& e : sim.take_events()) broadcast(event_frame(e), false);
        if (k % ticks_per_state == 0) broadcast(state_frame(rec, sim.session(), sim.config().intrinsics), true);
    }
}

http::response<http::string_body> ServiceState::respond(const http::request<http::string_body>& req) const {
    auto make = [&](http::status status, std::string body, const std::string& type) {
        http::response<http::string_body> res{status, req.version()};
        res.set(http::field::server, "dronecine");
        res.set(http::field::content_type, type);
        res.keep_alive(req.keep_alive());
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    };
    auto not_found = [&] { return make(http::status::not_found, "not found\n", "text/plain"); };

    if (req.method() != http::verb::get && req.method() != http::verb::head) {
        return make(http::status::method_not_allowed, "GET only\n", "text/plain");
    }
    const auto target = clean_target(req.target());
    if (!target) return make(http::status::bad_request, "bad path\n", "text/plain");
    const std::string& path = *target;

    if (path == "/scenarios") {
        nlohmann::json names = nlohmann::json::array();
        if (!options.scenario_dir.empty()) {
            try {
                for (const auto& n : list_scenarios(options.scenario_dir)) names.push_back(n);
            } catch (const std::exception& e) {
                return make(http::status::internal_server_error, std::string(e.what()) + "\n", "text/plain");
            }
        }
        return make(http::status::ok, names.dump(), "application/json");
    }
    if (path.rfind("/scenarios/", 0) == 0) {
        if (options.scenario_dir.empty()) return not_found();
        const std::string name = path.substr(11);
        if (name.empty() || name.find('/') != std::string::npos) return not_found();
        const std::string body = read_file(options.scenario_dir / (name + ".json"));
        if (body.empty()) return not_found();
        return make(http::status::ok, body, "application/json");
    }
    if (!options.serve_ui) return not_found();
    if (options.ui_dir.empty()) {
        if (path == "/" || path == "/index.html") return make(http::status::ok, kStatusPage, "text/html; charset=utf-8");
        return not_found();
    }
    const std::filesystem::path file = options.ui_dir / (path == "/" ? "index.html" : path.substr(1));
    if (!std::filesystem::is_regular_file(file)) return not_found();
    return make(http::status::ok, read_file(file), mime_type(file));
}

LiveService::LiveService(Scenario scenario, SimulationConfig config, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(config), std::move(options))) {
    if (!(impl_->options.speed > 0.0)) throw std::invalid_argument("speed must be positive");
}

LiveService::~LiveService() { stop(); }

void LiveService::start() {
    Impl& s = *impl_;
    if (s.started) return;
    const tcp::endpoint endpoint(net::ip::make_address(s.options.address), s.options.port);
    s.acceptor.open(endpoint.protocol());
    s.acceptor.set_option(net::socket_base::reuse_address(true));
    s.acceptor.bind(endpoint);
    s.acceptor.listen(net::socket_base::max_listen_connections);
    s.started = true;
    s.accept();
    s.work.emplace(net::make_work_guard(s.ioc));
    s.io_thread = std::thread([&s] { s.ioc.run(); });
    s.sim_thread = std::thread([&s] { s.run_simulation(); });
}

void LiveService::stop() {
    Impl& s = *impl_;
    {
        std::lock_guard lock(s.mutex);
        if (!s.started || s.stopping) return;
        s.stopping = true;
    }
    s.wake.notify_all();
    s.sim_thread.join();

    std::promise<void> closed;
    net::post(s.ioc, [&s, &closed] {
        beast::error_code ec;
        s.acceptor.close(ec);
        for (const auto& session : s.sessions) session->close();
        s.sessions.clear();
        closed.set_value();
    });
    closed.get_future().wait();
    s.work.reset();
    s.ioc.stop();
    s.io_thread.join();
}

void LiveService::wait() {
    Impl& s = *impl_;
    std::unique_lock lock(s.mutex);
    s.wake.wait(lock, [&] { return s.stopping; });
}

unsigned short LiveService::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace dronecine
