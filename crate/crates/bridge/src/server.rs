//! WebSocket server on `/ws`. One task owns the [`Session`]; clients reach it
//! only through an ordered event queue and receive serialized snapshots.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc};
use tokio::time::MissedTickBehavior;

use crate::protocol::{parse_client_event, ClientEvent, ServerMessage};
use crate::session::{Catalog, Session};
use crate::BridgeError;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub port: u16,
    /// Simulated seconds per wall-clock second.
    pub rtf: f64,
    pub scenario_dir: PathBuf,
    /// Scenario to start with; defaults to the first in the catalog.
    pub scenario: Option<String>,
}

struct Inbound {
    event: ClientEvent,
    reply: mpsc::UnboundedSender<ServerMessage>,
}

#[derive(Clone)]
struct AppState {
    events: mpsc::UnboundedSender<Inbound>,
    states: broadcast::Sender<Arc<String>>,
}

fn check_rtf(rtf: f64) -> Result<(), BridgeError> {
    if rtf > 0.0 && rtf.is_finite() {
        Ok(())
    } else {
        Err(BridgeError::InvalidRealTimeFactor(rtf))
    }
}

/// Load the catalog, bind the port and run until the listener fails.
pub async fn serve(options: ServeOptions) -> Result<(), BridgeError> {
    check_rtf(options.rtf)?;
    let catalog = Catalog::from_dir(&options.scenario_dir)?;
    let name = match &options.scenario {
        Some(n) => n.clone(),
        None => catalog.names().next().expect("catalog is non-empty").to_string(),
    };
    let session = Session::new(catalog, &name)?;
    let listener = TcpListener::bind(("0.0.0.0", options.port))
        .await
        .map_err(|source| BridgeError::Bind {
            port: options.port,
            source,
        })?;
    tracing::info!(addr = %listener.local_addr()?, scenario = %name, rtf = options.rtf, "serving");
    serve_on(listener, session, options.rtf).await
}

/// Serve `session` on an already bound listener.
pub async fn serve_on(listener: TcpListener, session: Session, rtf: f64) -> Result<(), BridgeError> {
    check_rtf(rtf)?;
    let (events, inbox) = mpsc::unbounded_channel();
    let (states, _) = broadcast::channel(64);
    tokio::spawn(run_loop(session, rtf, inbox, states.clone()));
    let app = Router::new()
        .route("/ws", get(upgrade))
        .with_state(AppState { events, states });
    axum::serve(listener, app).await?;
    Ok(())
}

async fn run_loop(
    mut session: Session,
    rtf: f64,
    mut inbox: mpsc::UnboundedReceiver<Inbound>,
    states: broadcast::Sender<Arc<String>>,
) {
    let period = |dt: f64| Duration::from_secs_f64(dt / rtf);
    let mut dt = session.dt();
    let mut ticker = tokio::time::interval(period(dt));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        ticker.tick().await;
        while let Ok(Inbound { event, reply }) = inbox.try_recv() {
            let ack = session.handle_event(event);
            let _ = reply.send(ServerMessage::Ack(ack));
        }
        session.step();
        let state = ServerMessage::State(Box::new(session.snapshot())).to_json();
        // No subscribers is fine.
        let _ = states.send(Arc::new(state));
        if session.dt() != dt {
            dt = session.dt();
            ticker = tokio::time::interval(period(dt));
            ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
        }
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(app): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, app))
}

async fn client(socket: WebSocket, app: AppState) {
    let (mut sink, mut stream) = socket.split();
    let (reply, mut replies) = mpsc::unbounded_channel::<ServerMessage>();
    let mut snapshots = app.states.subscribe();

    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                msg = replies.recv() => match msg {
                    Some(m) => m.to_json(),
                    None => break,
                },
                state = snapshots.recv() => match state {
                    Ok(s) => s.as_str().to_owned(),
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                },
            };
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = stream.next().await {
        match msg {
            Message::Text(text) => match parse_client_event(text.as_str()) {
                Ok(event) => {
                    let inbound = Inbound {
                        event,
                        reply: reply.clone(),
                    };
                    if app.events.send(inbound).is_err() {
                        break;
                    }
                }
                Err(message) => {
                    let _ = reply.send(ServerMessage::Error { message });
                }
            },
            Message::Binary(_) => {
                let _ = reply.send(ServerMessage::Error {
                    message: "binary frames are not supported".into(),
                });
            }
            Message::Close(_) => break,
            _ => {}
        }
    }
    writer.abort();
}
