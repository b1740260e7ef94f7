#include "vismas/session.hpp"

#include "vismas/protocol.hpp"
#include "vismas/trace.hpp"

#include <boost/asio/bind_executor.hpp>
#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

namespace vismas {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection;

// Socket-side bookkeeping. Only touched from the io thread.
struct Hub {
    std::map<std::uint64_t, std::shared_ptr<Connection>> clients;
    std::uint64_t next_id = 1;
    std::string state_for_authority;
    std::string state_for_observer;
    bool ending = false;

    std::optional<std::uint64_t> authority() const
    {
        if (clients.empty()) {
            return std::nullopt;
        }
        return clients.begin()->first;
    }
};

} // namespace

struct SessionServer::Impl {
    Simulation& sim;
    std::string scenario;
    ServeOptions options;

    asio::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::optional<asio::signal_set> signals;
    Hub hub;

    std::mutex stop_mutex;
    std::condition_variable stop_cv;
    std::optional<std::string> stop_reason;

    Impl(Simulation& s, std::string name, ServeOptions o) : sim(s), scenario(std::move(name)), options(std::move(o)) {}

    void accept();
    void on_message(std::uint64_t id, const std::string& text);
    void remove(std::uint64_t id);
    void broadcast_state(const protocol::StateView& view);
    void broadcast(std::string message);
    void request_stop(const std::string& reason)
    {
        {
            std::lock_guard lock(stop_mutex);
            if (!stop_reason) {
                stop_reason = reason;
            }
        }
        stop_cv.notify_all();
    }
};

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, std::uint64_t id, SessionServer::Impl& server)
        : ws_(std::move(socket)), id_(id), server_(server)
    {
    }

    void start(std::function<void()> on_open)
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        ws_.async_accept([self = shared_from_this(), on_open = std::move(on_open)](beast::error_code ec) {
            if (ec) {
                self->fail();
                return;
            }
            on_open();
            self->read();
        });
    }

    void send(std::string message)
    {
        if (closed_) {
            return;
        }
        queue_.push_back(std::move(message));
        if (queue_.size() == 1) {
            write_next();
        }
    }

    void close_after_flush()
    {
        close_requested_ = true;
        if (queue_.empty()) {
            do_close();
        }
    }

    std::uint64_t id() const { return id_; }

private:
    void read()
    {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->fail();
                return;
            }
            std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->server_.on_message(self->id_, text);
            self->read();
        });
    }

    void write_next()
    {
        ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->fail();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty()) {
                self->write_next();
            } else if (self->close_requested_) {
                self->do_close();
            }
        });
    }

    void do_close()
    {
        if (closed_) {
            return;
        }
        closed_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->server_.remove(self->id_); });
    }

    void fail()
    {
        closed_ = true;
        queue_.clear();
        server_.remove(id_);
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    std::uint64_t id_;
    SessionServer::Impl& server_;
    bool close_requested_ = false;
    bool closed_ = false;
};

std::string error_message(const std::string& text)
{
    return nlohmann::json{{"type", "error"}, {"v", protocol::version}, {"message", text}}.dump();
}

} // namespace

void SessionServer::Impl::accept()
{
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            return; // acceptor closed
        }
        if (hub.ending) {
            return;
        }
        const std::uint64_t id = hub.next_id++;
        auto connection = std::make_shared<Connection>(std::move(socket), id, *this);
        connection->start([this, id, connection] {
            if (hub.ending) {
                return;
            }
            hub.clients.emplace(id, connection);
            // a fresh client always starts from a complete snapshot
            connection->send(hub.authority() == id ? hub.state_for_authority : hub.state_for_observer);
        });
        accept();
    });
}

void SessionServer::Impl::remove(std::uint64_t id)
{
    hub.clients.erase(id);
}

void SessionServer::Impl::on_message(std::uint64_t id, const std::string& text)
{
    auto it = hub.clients.find(id);
    if (it == hub.clients.end()) {
        return;
    }
    const std::shared_ptr<Connection> client = it->second;
    protocol::ClientMessage message;
    try {
        message = protocol::parse_client_message(text);
    } catch (const ProtocolError& e) {
        if (sim.live && text.find("\"steer\"") != std::string::npos) {
            sim.live->reject();
        }
        client->send(error_message(e.what()));
        return;
    }
    if (hub.authority() != id) {
        client->send(error_message("steering authority is held by another client; message ignored"));
        return;
    }
    if (std::holds_alternative<protocol::EndSession>(message)) {
        request_stop("client");
        return;
    }
    try {
        sim.scheduler->post(std::get<Command>(message), CommandOrigin::live);
    } catch (const std::exception& e) {
        client->send(error_message(e.what()));
    }
}

void SessionServer::Impl::broadcast_state(const protocol::StateView& view)
{
    protocol::StateView v = view;
    v.authority = true;
    std::string with = protocol::encode_state(v);
    v.authority = false;
    std::string without = protocol::encode_state(v);
    asio::post(ioc, [this, with = std::move(with), without = std::move(without)]() mutable {
        hub.state_for_authority = std::move(with);
        hub.state_for_observer = std::move(without);
        const auto holder = hub.authority();
        for (auto& [id, c] : hub.clients) {
            c->send(id == holder ? hub.state_for_authority : hub.state_for_observer);
        }
    });
}

void SessionServer::Impl::broadcast(std::string message)
{
    asio::post(ioc, [this, message = std::move(message)] {
        for (auto& [id, c] : hub.clients) {
            c->send(message);
        }
    });
}

SessionServer::SessionServer(Simulation& simulation, std::string scenario_name, ServeOptions options)
    : impl_(std::make_unique<Impl>(simulation, std::move(scenario_name), std::move(options)))
{
    Impl& s = *impl_;
    try {
        const tcp::endpoint endpoint(asio::ip::make_address(s.options.address), s.options.port);
        s.acceptor.open(endpoint.protocol());
        s.acceptor.set_option(asio::socket_base::reuse_address(true));
        s.acceptor.bind(endpoint);
        s.acceptor.listen();
    } catch (const boost::system::system_error& e) {
        throw std::runtime_error("cannot listen on " + s.options.address + ":" + std::to_string(s.options.port) +
                                 ": " + e.code().message());
    }
}

SessionServer::~SessionServer() = default;

unsigned short SessionServer::port() const
{
    return impl_->acceptor.local_endpoint().port();
}

void SessionServer::stop(const std::string& reason)
{
    impl_->request_stop(reason);
}

SessionSummary SessionServer::run()
{
    Impl& s = *impl_;
    Scheduler& scheduler = *s.sim.scheduler;
    const ConvergenceCriteria criteria = scheduler.config().convergence;

    if (s.options.handle_signals) {
        s.signals.emplace(s.ioc, SIGINT, SIGTERM);
        s.signals->async_wait([&s](beast::error_code ec, int) {
            if (!ec) {
                s.request_stop("signal");
            }
        });
    }

    std::optional<TraceWriter> writer;
    if (s.options.trace_out) {
        writer.emplace(*s.options.trace_out, s.scenario, scheduler.agent_configs(), true);
    }

    protocol::StateView view;
    view.scenario = s.scenario;
    view.state = scheduler.board().snapshot();
    view.agents = scheduler.agent_configs();
    view.delta = scheduler.config().normalization;
    view.assessment = assess(*view.state, criteria);
    s.broadcast_state(view);

    auto guard = asio::make_work_guard(s.ioc);
    s.accept();
    std::thread io([&s] { s.ioc.run(); });

    SessionSummary summary;
    StallDetector stall(criteria.stall_ticks, criteria.stall_radius);
    stall.observe(*view.state, false);
    if (view.assessment.converged) {
        summary.reason = "converged";
        summary.outcome = Outcome::converged;
    }

    using clock = std::chrono::steady_clock;
    const auto period = s.options.ticks_per_second > 0.0
                            ? std::chrono::duration_cast<clock::duration>(
                                  std::chrono::duration<double>(1.0 / s.options.ticks_per_second))
                            : clock::duration::zero();
    auto next = clock::now();
    while (!summary.outcome) {
        {
            std::unique_lock lock(s.stop_mutex);
            if (period > clock::duration::zero()) {
                s.stop_cv.wait_until(lock, next, [&s] { return s.stop_reason.has_value(); });
            }
            if (s.stop_reason) {
                summary.reason = *s.stop_reason;
                break;
            }
        }
        next += period;
        if (summary.ticks >= scheduler.config().max_ticks) {
            summary.reason = "max_ticks";
            summary.outcome = Outcome::max_ticks;
            break;
        }
        const TickRecord& record = scheduler.tick();
        ++summary.ticks;
        if (writer) {
            writer->write(record);
        }
        for (const Firing& f : record.firings) {
            view.last_contribution[f.agent_id] = f.normalized;
        }
        view.state = scheduler.board().snapshot();
        view.agents = scheduler.agent_configs();
        view.delta = scheduler.config().normalization;
        view.assessment = record.assessment;
        view.stalled = stall.observe(*view.state, !record.commands.empty());
        s.broadcast(protocol::encode_trace_event(record));
        s.broadcast_state(view);
        if (record.assessment.converged) {
            summary.reason = "converged";
            summary.outcome = Outcome::converged;
        }
    }
    if (writer && summary.outcome) {
        writer->finish({*summary.outcome, summary.ticks, view.assessment});
    }

    const std::string ended = protocol::encode_ended(summary.reason, summary.outcome, summary.ticks);
    asio::post(s.ioc, [&s, ended] {
        s.hub.ending = true;
        beast::error_code ignored;
        s.acceptor.close(ignored);
        if (s.signals) {
            s.signals->cancel(ignored);
        }
        auto clients = s.hub.clients;
        for (auto& [id, c] : clients) {
            c->send(ended);
            c->close_after_flush();
        }
    });
    guard.reset();
    // bounded wait for closing handshakes
    std::thread watchdog([&s] {
        for (int i = 0; i < 40 && !s.ioc.stopped(); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        s.ioc.stop();
    });
    io.join();
    watchdog.join();
    return summary;
}

} // namespace vismas
